#include "seqdisc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace seqdisc {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(path + ": cannot open file for writing");
  out << text;
  if (!out) throw InvalidInput(path + ": write failed");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256_hex: digest computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_document(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    const auto [line, column] = line_column(text, err.byte);
    std::ostringstream os;
    os << source << ":" << line << ":" << column << ": syntax error: " << err.what();
    throw InvalidInput(os.str());
  }
}

[[noreturn]] void field_error(const std::string& source, const std::string& field,
                              const std::string& message) {
  throw InvalidInput(source + ": " + field + ": " + message);
}

const json& require_field(const json& obj, const char* key, const std::string& source,
                          const std::string& path) {
  if (!obj.is_object()) field_error(source, path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(source, path, std::string("missing field \"") + key + "\"");
  return *it;
}

double read_real(const json& v, const std::string& source, const std::string& path) {
  if (!v.is_number()) field_error(source, path, "expected a number");
  return v.get<double>();
}

Complex read_complex(const json& v, const std::string& source, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) field_error(source, path, "expected an [re, im] pair");
  return {read_real(v[0], source, path + "[0]"), read_real(v[1], source, path + "[1]")};
}

Index read_dimension(const json& doc, const std::string& source) {
  const json& d = require_field(doc, "dimension", source, "document");
  if (!d.is_number_integer() || d.get<long long>() < 1) {
    field_error(source, "dimension", "expected a positive integer");
  }
  return static_cast<Index>(d.get<long long>());
}

CMatrix read_matrix(const json& v, Index dim, const std::string& source,
                    const std::string& path) {
  if (!v.is_array() || static_cast<Index>(v.size()) != dim) {
    field_error(source, path, "expected " + std::to_string(dim) + " rows");
  }
  CMatrix m(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    const std::string rpath = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Index>(row.size()) != dim) {
      field_error(source, rpath, "expected " + std::to_string(dim) + " entries");
    }
    for (Index c = 0; c < dim; ++c) {
      m(r, c) = read_complex(row[static_cast<std::size_t>(c)], source,
                             rpath + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

CVector read_vector(const json& v, Index dim, const std::string& source,
                    const std::string& path) {
  if (!v.is_array() || static_cast<Index>(v.size()) != dim) {
    field_error(source, path, "expected " + std::to_string(dim) + " entries");
  }
  CVector out(dim);
  for (Index i = 0; i < dim; ++i) {
    out(i) = read_complex(v[static_cast<std::size_t>(i)], source,
                          path + "[" + std::to_string(i) + "]");
  }
  return out;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

RawEnsemble parse_ensemble(const std::string& text, const std::string& source) {
  const json doc = parse_document(text, source);
  const Index dim = read_dimension(doc, source);
  RawEnsemble raw;
  if (auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) field_error(source, "label", "expected a string");
    raw.label = it->get<std::string>();
  }
  const json& states = require_field(doc, "states", source, "document");
  if (!states.is_array()) field_error(source, "states", "expected an array");
  for (std::size_t j = 0; j < states.size(); ++j) {
    const std::string path = "states[" + std::to_string(j) + "]";
    const json& rec = states[j];
    raw.priors.push_back(read_real(require_field(rec, "prior", source, path), source,
                                   path + ".prior"));
    const bool has_matrix = rec.contains("matrix");
    const bool has_vector = rec.contains("vector");
    if (has_matrix == has_vector) {
      field_error(source, path, "exactly one of \"matrix\" or \"vector\" is required");
    }
    if (has_matrix) {
      raw.states.push_back(read_matrix(rec["matrix"], dim, source, path + ".matrix"));
    } else {
      const CVector v = read_vector(rec["vector"], dim, source, path + ".vector");
      if (v.norm() == 0.0) field_error(source, path + ".vector", "zero vector");
      raw.states.push_back(pure_state(v));
    }
  }
  return raw;
}

Ensemble load_ensemble(const std::string& path, const Tolerances& tol) {
  const RawEnsemble raw = parse_ensemble(read_text_file(path), path);
  const auto problems = ensemble_violations(raw, tol);
  if (!problems.empty()) {
    std::string msg = path + ": invalid ensemble:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvalidInput(msg);
  }
  return Ensemble(raw, tol);
}

std::string ensemble_to_json(const Ensemble& e) {
  json doc;
  doc["dimension"] = e.dim();
  if (!e.label().empty()) doc["label"] = e.label();
  json states = json::array();
  for (Index j = 0; j < e.size(); ++j) {
    states.push_back({{"prior", e.prior(j)}, {"matrix", matrix_json(e.state(j))}});
  }
  doc["states"] = std::move(states);
  return doc.dump(2) + "\n";
}

Povm parse_povm(const std::string& text, const std::string& source, const Tolerances& tol,
                double completeness_tol) {
  const json doc = parse_document(text, source);
  const Index dim = read_dimension(doc, source);
  const json& effects = require_field(doc, "effects", source, "document");
  if (!effects.is_array() || effects.empty()) {
    field_error(source, "effects", "expected a non-empty array");
  }
  std::vector<CMatrix> mats;
  for (std::size_t j = 0; j < effects.size(); ++j) {
    mats.push_back(read_matrix(effects[j], dim, source, "effects[" + std::to_string(j) + "]"));
  }
  std::optional<Index> inconclusive;
  if (auto it = doc.find("inconclusive_index"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      field_error(source, "inconclusive_index", "expected an integer");
    }
    inconclusive = static_cast<Index>(it->get<long long>());
  }
  try {
    return Povm(std::move(mats), inconclusive, tol, completeness_tol);
  } catch (const InvalidInput& err) {
    throw InvalidInput(source + ": invalid POVM: " + err.what());
  }
}

Povm load_povm(const std::string& path, const Tolerances& tol, double completeness_tol) {
  return parse_povm(read_text_file(path), path, tol, completeness_tol);
}

std::string povm_to_json(const Povm& m) {
  json doc;
  doc["dimension"] = m.dim();
  json effects = json::array();
  for (const auto& e : m.effects()) effects.push_back(matrix_json(e));
  doc["effects"] = std::move(effects);
  if (m.inconclusive_index()) doc["inconclusive_index"] = *m.inconclusive_index();
  return doc.dump(2) + "\n";
}

}  // namespace seqdisc
