#ifndef QAT_SERIALIZE_HPP
#define QAT_SERIALIZE_HPP

#include "qat/assemblage.hpp"
#include "qat/infocrit.hpp"
#include "qat/lossmodel.hpp"
#include "qat/simulator.hpp"
#include "qat/solver.hpp"
#include "qat/steering.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace qat::io {

using Json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1.0";

/// Malformed or inconsistent input; `line` is 1-based, 0 when not applicable.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Matrices are nested arrays of [re, im] pairs, row-major.
Json matrix_to_json(const HermitianOp& m);
HermitianOp matrix_from_json(const Json& j);

Json assemblage_to_json(const Assemblage& a);
Assemblage assemblage_from_json(const Json& j);

Json measurements_to_json(const MeasurementSet& m);
MeasurementSet measurements_from_json(const Json& j);

Json loss_to_json(const LossParams& p);
LossParams loss_from_json(const Json& j);

/// `emit_trace` controls whether the full iteration trace is included.
Json fit_to_json(const FitResult& r, bool emit_trace = true);
FitResult fit_from_json(const Json& j);

Json steering_to_json(const SteeringResult& r, bool certificates = false);
Json truth_to_json(const GroundTruth& t);

/// Rejects documents whose format_version major differs from ours.
void check_version(const Json& j, const std::string& what);

// Counts CSV: header `x,a,y,b,count`, a in {p, m, null}, b in {p, m}.
std::string counts_to_csv(const CountTensor& c);
CountTensor counts_from_csv(const std::string& text);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);
Json read_json(const std::filesystem::path& p);
void write_json(const std::filesystem::path& p, const Json& j);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

/// INI configuration with optional [simulation] and [fit] sections. Unknown
/// keys and unparsable values raise InputError with the offending line.
struct RunConfig {
  SimConfig sim;
  FitConfig fit;
  std::string state_file;  // explicit two-qubit state (JSON matrix), resolved against the config directory
};
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& p);

std::string state_kind_name(StateKind k);
Json sim_config_to_json(const SimConfig& c);
Json fit_config_to_json(const FitConfig& c);

}  // namespace qat::io

#endif  // QAT_SERIALIZE_HPP
