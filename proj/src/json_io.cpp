#include "boselab/json_io.hpp"

namespace boselab {

nlohmann::json operator_to_json(const Matrix& m, const std::string& label, double drop_tol) {
  nlohmann::json j;
  j["dims"] = {m.rows(), m.cols()};
  nlohmann::json entries = nlohmann::json::array();
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      const Complex v = m(r, c);
      if (std::abs(v) <= drop_tol) continue;
      entries.push_back({r, c, v.real(), v.imag()});
    }
  }
  j["entries"] = std::move(entries);
  j["label"] = label;
  return j;
}

nlohmann::json operator_to_json(const FockOperator& op, double drop_tol) {
  nlohmann::json j = operator_to_json(op.matrix, op.label, drop_tol);
  j["hermitian"] = op.hermitian;
  return j;
}

Matrix operator_from_json(const nlohmann::json& j, std::string* label_out) {
  const auto& dims = j.at("dims");
  Matrix m = Matrix::Zero(dims.at(0).get<int>(), dims.at(1).get<int>());
  for (const auto& e : j.at("entries")) {
    m(e.at(0).get<int>(), e.at(1).get<int>()) =
        Complex(e.at(2).get<double>(), e.at(3).get<double>());
  }
  if (label_out && j.contains("label")) *label_out = j["label"].get<std::string>();
  return m;
}

}  // namespace boselab
