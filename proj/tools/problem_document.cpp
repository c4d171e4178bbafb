#include "problem_document.hpp"

#include <cmath>
#include <iterator>
#include <sstream>

namespace ocifuse::cli {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "; " : "") << parts[i];
  return os.str();
}

/// Collects schema violations while reading.
class Reader {
 public:
  std::vector<std::string>& errors() { return errors_; }

  const Json* field(const Json& obj, const std::string& key, const std::string& path,
                    bool required) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors_.push_back(path + key + ": missing");
      return nullptr;
    }
    return &*it;
  }

  std::optional<Matrix> matrix(const Json& obj, const std::string& key, const std::string& path,
                               bool required = true) {
    const Json* j = field(obj, key, path, required);
    if (!j) return std::nullopt;
    const std::string where = path + key;
    if (!j->is_array() || j->empty() || !(*j)[0].is_array() || (*j)[0].empty()) {
      errors_.push_back(where + ": expected a non-empty array of rows");
      return std::nullopt;
    }
    const auto rows = static_cast<Index>(j->size());
    const auto cols = static_cast<Index>((*j)[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const Json& row = (*j)[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
        errors_.push_back(where + ": row " + std::to_string(r) + " does not have " +
                          std::to_string(cols) + " entries");
        return std::nullopt;
      }
      for (Index c = 0; c < cols; ++c) {
        const Json& v = row[static_cast<std::size_t>(c)];
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          errors_.push_back(where + "[" + std::to_string(r) + "][" + std::to_string(c) +
                            "]: expected a finite number");
          return std::nullopt;
        }
        m(r, c) = v.get<double>();
      }
    }
    return m;
  }

  std::optional<SymMatrix> sym(const Json& obj, const std::string& key, const std::string& path,
                               bool required = true) {
    auto m = matrix(obj, key, path, required);
    if (!m) return std::nullopt;
    if (m->rows() != m->cols()) {
      errors_.push_back(path + key + ": expected a square matrix, got " +
                        std::to_string(m->rows()) + "x" + std::to_string(m->cols()));
      return std::nullopt;
    }
    try {
      return SymMatrix::from_matrix(*m);
    } catch (const std::invalid_argument&) {
      errors_.push_back(path + key + ": matrix is not symmetric");
      return std::nullopt;
    }
  }

  std::optional<Vector> vector(const Json& obj, const std::string& key, const std::string& path,
                               bool required = true) {
    const Json* j = field(obj, key, path, required);
    if (!j) return std::nullopt;
    const std::string where = path + key;
    if (!j->is_array() || j->empty()) {
      errors_.push_back(where + ": expected a non-empty array of numbers");
      return std::nullopt;
    }
    Vector v(static_cast<Index>(j->size()));
    for (std::size_t i = 0; i < j->size(); ++i) {
      const Json& e = (*j)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        errors_.push_back(where + "[" + std::to_string(i) + "]: expected a finite number");
        return std::nullopt;
      }
      v(static_cast<Index>(i)) = e.get<double>();
    }
    return v;
  }

  const Json* array(const Json& obj, const std::string& key) {
    const Json* j = field(obj, key, "", true);
    if (!j) return nullptr;
    if (!j->is_array() || j->empty()) {
      errors_.push_back(key + ": expected a non-empty array");
      return nullptr;
    }
    return j;
  }

 private:
  std::vector<std::string> errors_;
};

/// Reads "estimates" with the given bound key; stacks z when every estimate
/// carries one.
std::vector<Estimate> read_estimates(Reader& rd, const Json& j, const char* bound_key,
                                     std::optional<Vector>& z) {
  std::vector<Estimate> out;
  const Json* list = rd.array(j, "estimates");
  if (!list) return out;
  std::vector<Vector> zs;
  std::size_t with_z = 0;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const Json& e = (*list)[i];
    const std::string path = "estimates[" + std::to_string(i) + "].";
    if (!e.is_object()) {
      rd.errors().push_back("estimates[" + std::to_string(i) + "]: expected an object");
      continue;
    }
    auto h = rd.matrix(e, "H", path);
    auto x = rd.sym(e, bound_key, path);
    auto zi = rd.vector(e, "z", path, /*required=*/false);
    if (e.contains("z")) ++with_z;
    if (h && x) out.push_back({*h, *x});
    if (zi) zs.push_back(*zi);
  }
  if (with_z != 0 && with_z != list->size()) {
    rd.errors().push_back("estimates: z must be given for every estimate or for none");
  } else if (with_z != 0 && zs.size() == list->size()) {
    Index total = 0;
    for (const auto& v : zs) total += v.size();
    Vector stacked(total);
    Index at = 0;
    for (const auto& v : zs) {
      stacked.segment(at, v.size()) = v;
      at += v.size();
    }
    z = std::move(stacked);
  }
  return out;
}

template <typename Problem>
void require_clean(Reader& rd, const Problem& p,
                   std::vector<std::string> (*validate)(const Problem&)) {
  if (!rd.errors().empty()) throw DocumentError(rd.errors());
  auto violations = validate(p);
  if (!violations.empty()) throw DocumentError(std::move(violations));
}

Json estimate_json(const Estimate& e, const char* bound_key, const Vector* z, Index& at) {
  Json j;
  j["H"] = matrix_to_json(e.h);
  j[bound_key] = matrix_to_json(e.bound.matrix());
  if (z) {
    j["z"] = vector_to_json(z->segment(at, e.h.rows()));
    at += e.h.rows();
  }
  return j;
}

}  // namespace

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::kCi:
      return "ci";
    case ProblemKind::kSci:
      return "sci";
    case ProblemKind::kOci:
      return "oci";
  }
  return "ci";
}

std::optional<ProblemKind> parse_kind(std::string_view s) {
  if (s == "ci") return ProblemKind::kCi;
  if (s == "sci") return ProblemKind::kSci;
  if (s == "oci") return ProblemKind::kOci;
  return std::nullopt;
}

Criterion ProblemDocument::criterion() const {
  return std::visit([](const auto& p) { return p.criterion; }, problem);
}

void ProblemDocument::set_criterion(Criterion c) {
  std::visit([c](auto& p) { p.criterion = c; }, problem);
}

Matrix ProblemDocument::h() const {
  if (const auto* o = std::get_if<OciProblem>(&problem)) return o->h;
  if (const auto* c = std::get_if<CiProblem>(&problem)) return stacked_h(c->estimates);
  return stacked_h(std::get<SciProblem>(problem).estimates);
}

OciProblem ProblemDocument::as_oci() const {
  if (const auto* o = std::get_if<OciProblem>(&problem)) return *o;
  if (const auto* c = std::get_if<CiProblem>(&problem)) return ci_to_oci(*c);
  return sci_to_oci(std::get<SciProblem>(problem));
}

DocumentError::DocumentError(std::vector<std::string> violations)
    : std::runtime_error("invalid problem document: " + join(violations)),
      violations_(std::move(violations)) {}

ProblemDocument parse_document(const Json& j) {
  if (!j.is_object()) throw DocumentError({"document: expected a JSON object"});
  Reader rd;
  ProblemDocument doc;

  const Json* version = rd.field(j, "version", "", true);
  if (version) {
    if (!version->is_string()) {
      rd.errors().push_back("version: expected a string");
    } else if (version->get<std::string>() != kSchemaVersion) {
      rd.errors().push_back("version: unsupported schema version \"" +
                            version->get<std::string>() + "\" (expected \"" +
                            std::string(kSchemaVersion) + "\")");
    } else {
      doc.version = version->get<std::string>();
    }
  }

  Criterion criterion = Criterion::kTrace;
  if (const Json* c = rd.field(j, "criterion", "", false)) {
    try {
      criterion = parse_criterion(c->is_string() ? c->get<std::string>() : std::string());
    } catch (const std::invalid_argument&) {
      rd.errors().push_back("criterion: expected \"trace\" or \"logdet\"");
    }
  }

  const Json* kind = rd.field(j, "kind", "", true);
  if (!kind) throw DocumentError(rd.errors());
  const auto parsed_kind =
      kind->is_string() ? parse_kind(kind->get<std::string>()) : std::optional<ProblemKind>{};
  if (!parsed_kind) {
    rd.errors().push_back("kind: expected \"ci\", \"sci\" or \"oci\"");
    throw DocumentError(rd.errors());
  }
  doc.kind = *parsed_kind;

  switch (doc.kind) {
    case ProblemKind::kCi: {
      CiProblem p;
      p.criterion = criterion;
      p.estimates = read_estimates(rd, j, "X", doc.z);
      require_clean(rd, p, &validate_ci);
      doc.problem = std::move(p);
      break;
    }
    case ProblemKind::kSci: {
      SciProblem p;
      p.criterion = criterion;
      p.estimates = read_estimates(rd, j, "X1", doc.z);
      if (auto x2 = rd.sym(j, "X2", "")) p.known = *x2;
      require_clean(rd, p, &validate_sci);
      doc.problem = std::move(p);
      break;
    }
    case ProblemKind::kOci: {
      OciProblem p;
      p.criterion = criterion;
      auto h = rd.matrix(j, "H", "");
      auto r = rd.sym(j, "R", "");
      auto c = rd.matrix(j, "C", "");
      if (const Json* list = rd.array(j, "bounds")) {
        for (std::size_t i = 0; i < list->size(); ++i) {
          const std::string path = "bounds[" + std::to_string(i) + "].";
          auto w = rd.matrix((*list)[i], "W", path);
          auto x = rd.sym((*list)[i], "X", path);
          if (w && x) p.bounds.push_back({*w, *x});
        }
      }
      doc.z = rd.vector(j, "z", "", /*required=*/false);
      if (h) p.h = *h;
      if (r) p.noise = *r;
      if (c) p.coupling = *c;
      require_clean(rd, p, &validate_oci);
      doc.problem = std::move(p);
      break;
    }
  }

  if (doc.z && doc.z->size() != doc.h().rows()) {
    throw DocumentError({"z: has " + std::to_string(doc.z->size()) + " entries but H has " +
                         std::to_string(doc.h().rows()) + " rows"});
  }
  return doc;
}

ProblemDocument read_document(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DocumentError({std::string("malformed JSON: ") + e.what()});
  }
  return parse_document(j);
}

Json to_json(const ProblemDocument& doc) {
  Json j;
  j["version"] = doc.version;
  j["kind"] = std::string(to_string(doc.kind));
  j["criterion"] = std::string(to_string(doc.criterion()));
  const Vector* z = doc.z ? &*doc.z : nullptr;
  Index at = 0;
  if (const auto* c = std::get_if<CiProblem>(&doc.problem)) {
    j["estimates"] = Json::array();
    for (const auto& e : c->estimates) j["estimates"].push_back(estimate_json(e, "X", z, at));
  } else if (const auto* s = std::get_if<SciProblem>(&doc.problem)) {
    j["estimates"] = Json::array();
    for (const auto& e : s->estimates) j["estimates"].push_back(estimate_json(e, "X1", z, at));
    j["X2"] = matrix_to_json(s->known.matrix());
  } else {
    const auto& o = std::get<OciProblem>(doc.problem);
    j["H"] = matrix_to_json(o.h);
    j["R"] = matrix_to_json(o.noise.matrix());
    j["C"] = matrix_to_json(o.coupling);
    j["bounds"] = Json::array();
    for (const auto& b : o.bounds) {
      j["bounds"].push_back({{"W", matrix_to_json(b.selector)}, {"X", matrix_to_json(b.bound.matrix())}});
    }
    if (z) j["z"] = vector_to_json(*z);
  }
  return j;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace ocifuse::cli
