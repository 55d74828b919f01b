#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "mids/identify.hpp"
#include "mids/model.hpp"

namespace mids::io {

using json = nlohmann::json;

[[nodiscard]] json to_json(const Matrix& M);
[[nodiscard]] json to_json_vector(const Vector& v);
/// Stacked vector as n arrays of m entries.
[[nodiscard]] json to_json_stacked(const Vector& x, std::size_t m);

[[nodiscard]] Matrix matrix_from_json(const json& j, const char* field);
[[nodiscard]] Vector vector_from_json(const json& j, const char* field);
/// Accepts n arrays of m entries or one flat array of n*m entries.
[[nodiscard]] Vector stacked_from_json(const json& j, std::size_t n, std::size_t m, const char* field);

/// Model document: {n, m, W, Lambda, C, D?, u}. Throws Error{ParseError | DimensionMismatch}.
[[nodiscard]] ModelCandidate model_from_json(const json& doc);
[[nodiscard]] json model_to_json(const ModelCandidate& model);

/// Identification document: {W, Lambda, u, steady_state | observations}.
/// The horizon is inferred from which data field is present.
[[nodiscard]] IdentificationProblem identification_from_json(const json& doc);
[[nodiscard]] json identification_to_json(const IdentificationProblem& p);

[[nodiscard]] json read_json_file(const std::filesystem::path& path);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mids::io
