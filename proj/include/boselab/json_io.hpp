#ifndef BOSELAB_JSON_IO_HPP
#define BOSELAB_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "boselab/fock.hpp"

namespace boselab {

/// Sparse triplet JSON format for operators:
///   {"dims": [rows, cols], "entries": [[row, col, re, im], ...], "label": "..."}
/// Entries below drop_tol in magnitude are omitted. Used for golden files and
/// debugging; round-trips exactly for double-precision values.
nlohmann::json operator_to_json(const Matrix& m, const std::string& label,
                                double drop_tol = 0.0);

nlohmann::json operator_to_json(const FockOperator& op, double drop_tol = 0.0);

/// Parse the triplet format back. The label, when present, is returned through
/// `label_out`.
Matrix operator_from_json(const nlohmann::json& j, std::string* label_out = nullptr);

}  // namespace boselab

#endif  // BOSELAB_JSON_IO_HPP
