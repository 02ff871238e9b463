#ifndef SEQDISC_IO_HPP
#define SEQDISC_IO_HPP

#include <string>

#include "seqdisc/ensemble.hpp"

namespace seqdisc {

/// Reads a whole file; throws InvalidInput naming the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(const std::string& bytes);

/// Ensemble document:
///
///   {"dimension": 2, "label": "optional",
///    "states": [{"prior": 0.5, "vector": [[1,0],[0,0]]},
///               {"prior": 0.5, "matrix": [[[0.5,0],[0.5,0]], [[0.5,0],[0.5,0]]]}]}
///
/// Complex entries are [re, im] pairs (a bare number is read as real);
/// matrices are row-major. Errors carry `source` plus line/column for syntax
/// problems and a field path for structural ones.
RawEnsemble parse_ensemble(const std::string& text, const std::string& source = "<input>");
Ensemble load_ensemble(const std::string& path, const Tolerances& tol = {});
std::string ensemble_to_json(const Ensemble& e);

/// POVM document: {"dimension": d, "effects": [matrix, ...], "inconclusive_index": i}
/// with inconclusive_index optional.
Povm parse_povm(const std::string& text, const std::string& source = "<input>",
                const Tolerances& tol = {}, double completeness_tol = 1e-8);
Povm load_povm(const std::string& path, const Tolerances& tol = {},
               double completeness_tol = 1e-8);
std::string povm_to_json(const Povm& m);

}  // namespace seqdisc

#endif  // SEQDISC_IO_HPP
