#include <doctest.h>

#include "boselab/fock.hpp"
#include "boselab/json_io.hpp"

using namespace boselab;

namespace {

// brute-force count of occupation vectors with entries <= cutoff, sum <= nmax
int count_states(int modes, int cutoff, int nmax) {
  if (modes == 0) return nmax >= 0 ? 1 : 0;
  int total = 0;
  for (int k = 0; k <= std::min(cutoff, nmax); ++k) total += count_states(modes - 1, cutoff, nmax - k);
  return total;
}

}  // namespace

TEST_CASE("basis enumeration") {
  auto b = build_basis(1, 2);
  REQUIRE(b->dim() == 3);
  CHECK(b->states[0] == std::vector<int>{0});
  CHECK(b->states[1] == std::vector<int>{1});
  CHECK(b->states[2] == std::vector<int>{2});

  CHECK(build_basis(2, 1)->dim() == 4);

  auto capped = build_basis(2, 3, 2);
  CHECK(capped->dim() == count_states(2, 3, 2));  // = 6
  CHECK(capped->dim() == 6);
  // ordered by total occupation first
  CHECK(capped->total_occupation(0) == 0);
  CHECK(capped->total_occupation(capped->dim() - 1) == 2);
}

TEST_CASE("basis determinism and index bijection") {
  auto a = build_basis(3, 2, 4);
  auto b = build_basis(3, 2, 4);
  REQUIRE(a->dim() == b->dim());
  for (int i = 0; i < a->dim(); ++i) {
    CHECK(a->states[i] == b->states[i]);
    CHECK(a->index.at(a->states[i]) == i);
  }
}

TEST_CASE("basis hard cap") {
  CHECK_THROWS_AS(build_basis(8, 9), DimensionCapError);
  // error message carries a size report
  try {
    build_basis(8, 9);
  } catch (const DimensionCapError& e) {
    CHECK(std::string(e.what()).find("20000") != std::string::npos);
  }
}

TEST_CASE("ladder operators") {
  auto b = build_basis(1, 2);
  Matrix a = ladder_operator(b, 0, LadderKind::annihilate).matrix;
  CHECK(std::abs(a(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(a(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK(a.cwiseAbs().sum() == doctest::Approx(1.0 + std::sqrt(2.0)));

  Matrix n = ladder_operator(b, 0, LadderKind::number).matrix;
  CHECK(max_abs(n - a.adjoint() * a) < 1e-14);

  // truncated norm ||a|| = sqrt(cutoff)
  for (int cutoff : {2, 5, 9}) {
    auto bb = build_basis(1, cutoff);
    Matrix aa = ladder_operator(bb, 0, LadderKind::annihilate).matrix;
    CHECK(operator_norm(aa) == doctest::Approx(std::sqrt(double(cutoff))).epsilon(1e-12));
    CHECK(operator_norm(Matrix(aa.adjoint())) ==
          doctest::Approx(std::sqrt(double(cutoff))).epsilon(1e-12));
  }
}

TEST_CASE("commutator holds below the cutoff shell") {
  auto b = build_basis(1, 7);
  Matrix a = ladder_operator(b, 0, LadderKind::annihilate).matrix;
  Matrix comm = a * a.adjoint() - a.adjoint() * a;
  Matrix proj = Matrix::Zero(b->dim(), b->dim());
  for (int i = 0; i + 1 < b->dim(); ++i) proj(i, i) = 1.0;
  CHECK(max_abs(Matrix((comm - Matrix::Identity(b->dim(), b->dim())) * proj)) <= 1e-12);
}

TEST_CASE("occupation projector") {
  auto b = build_basis(1, 2);
  FockOperator n = ladder_operator(b, 0, LadderKind::number);
  Matrix p = occupation_projector(n, 1).matrix;
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK(max_abs(p - expected) < 1e-12);
  CHECK(operator_norm(Matrix(p * p - p)) <= 1e-10);

  // rotated-mode number operator: rank counts eigenvalues below 1/2
  auto b2 = build_basis(2, 3, 3);
  Matrix a0 = ladder_operator(b2, 0, LadderKind::annihilate).matrix;
  Matrix a1 = ladder_operator(b2, 1, LadderKind::annihilate).matrix;
  Matrix bk = std::sqrt(0.5) * (a0 + a1);
  FockOperator nb{b2, Matrix(bk.adjoint() * bk), true, "N_b"};
  Matrix p0 = occupation_projector(nb, 0).matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(bk.adjoint() * bk));
  int rank_expected = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < 0.5) ++rank_expected;
  CHECK(std::lround(std::real(p0.trace())) == rank_expected);
  CHECK(max_abs(Matrix(p0 * nb.matrix - nb.matrix * p0)) < 1e-10);

  // non-integer spectrum is refused
  FockOperator bad{b, Matrix(0.5 * n.matrix + 0.21 * Matrix::Identity(3, 3)), true, "bad"};
  CHECK_THROWS_AS(occupation_projector(bad, 1), NumericalError);
}

TEST_CASE("number sector blocks") {
  auto b = build_basis(2, 3, 2);
  FockOperator ntot = total_number_operator(b);
  auto blocks = number_sector_blocks(ntot);
  REQUIRE(blocks.size() == 3);
  for (const auto& blk : blocks) {
    Matrix expect = double(blk.sector_total) *
                    Matrix::Identity(blk.basis_indices.size(), blk.basis_indices.size());
    CHECK(max_abs(blk.block - expect) < 1e-14);
  }
  // sector dimensions 1, 2, 3 (compositions of k into 2 parts)
  CHECK(blocks[0].basis_indices.size() == 1);
  CHECK(blocks[1].basis_indices.size() == 2);
  CHECK(blocks[2].basis_indices.size() == 3);

  // reassembly round-trips
  Matrix re = assemble_from_blocks(b, blocks);
  CHECK(max_abs(re - ntot.matrix) <= 1e-12);

  // non-conserving operator errors with the commutator norm
  FockOperator a0 = ladder_operator(b, 0, LadderKind::annihilate);
  CHECK_THROWS_AS(number_sector_blocks(a0), NumericalError);
}

TEST_CASE("sector projectors resolve the identity") {
  auto b = build_basis(2, 2, 3);
  auto blocks = number_sector_blocks(total_number_operator(b));
  Matrix sum = Matrix::Zero(b->dim(), b->dim());
  for (const auto& blk : blocks)
    for (int i : blk.basis_indices) sum(i, i) += 1.0;
  CHECK(max_abs(sum - Matrix::Identity(b->dim(), b->dim())) < 1e-15);
}

TEST_CASE("operator json round trip") {
  auto b = build_basis(1, 3);
  FockOperator a = ladder_operator(b, 0, LadderKind::annihilate);
  nlohmann::json j = operator_to_json(a);
  CHECK(j["dims"][0] == 4);
  CHECK(j["label"] == "a_0");
  std::string label;
  Matrix back = operator_from_json(j, &label);
  CHECK(label == "a_0");
  CHECK(max_abs(back - a.matrix) == 0.0);
}
