#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ocifuse/problem.hpp"

namespace ocifuse::cli {

using Json = nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "1";

enum class ProblemKind { kCi, kSci, kOci };

std::string_view to_string(ProblemKind k);
std::optional<ProblemKind> parse_kind(std::string_view s);

/// A fusion problem as read from disk.
///
/// JSON layout (matrices are row-major nested arrays, vectors flat arrays):
///   {"version": "1", "kind": "ci", "criterion": "trace",
///    "estimates": [{"H": [[1, 0]], "X": [[2]], "z": [0.5]}, ...]}
///   {"version": "1", "kind": "sci", ..., "estimates": [{"H", "X1", "z"}],
///    "X2": [[...]]}
///   {"version": "1", "kind": "oci", ..., "H", "R", "C",
///    "bounds": [{"W", "X"}], "z": [...]}
/// The criterion defaults to "trace". Measurements z are optional; when
/// given they must be present for every estimate.
struct ProblemDocument {
  std::string version{kSchemaVersion};
  ProblemKind kind = ProblemKind::kCi;
  std::variant<CiProblem, SciProblem, OciProblem> problem;
  std::optional<Vector> z;  // stacked measurements

  Criterion criterion() const;
  void set_criterion(Criterion c);
  /// Stacked H of the problem.
  Matrix h() const;
  /// The problem in its general form (CI and SCI are converted).
  OciProblem as_oci() const;
};

/// Input that is not a valid problem document. Lists every violation found.
class DocumentError : public std::runtime_error {
 public:
  explicit DocumentError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Throws DocumentError for schema violations and for problems that fail
/// validate_ci / validate_sci / validate_oci.
ProblemDocument parse_document(const Json& j);
/// Parses JSON text, then parse_document. Throws DocumentError.
ProblemDocument read_document(std::istream& in);

Json to_json(const ProblemDocument& doc);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

}  // namespace ocifuse::cli
