// io.hpp
#ifndef QLGS_IO_HPP
#define QLGS_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qlgs/certificates.hpp"
#include "qlgs/error.hpp"
#include "qlgs/nonlinearity.hpp"
#include "qlgs/operator.hpp"
#include "qlgs/radial.hpp"
#include "qlgs/shooting.hpp"
#include "qlgs/variational.hpp"

namespace qlgs {

/// Malformed configuration; the message names the line or the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { Json, Csv };

/// Parameter ranges of a sweep. An absent range keeps the base value; an
/// empty one makes the whole Cartesian product empty.
struct SweepRanges {
  std::optional<std::vector<double>> alpha;
  std::optional<std::vector<int>> k;
  std::optional<std::vector<double>> beta;
  std::optional<std::vector<int>> dimension;
  std::optional<std::vector<std::size_t>> resolution;
  std::size_t cell_count() const;
};

/// Operator and nonlinearity blocks with every default filled in.
struct ProblemBlocks {
  std::string operator_json;
  std::string nonlinearity_json;
};

struct Config {
  OperatorSpec op;
  NonlinearitySpec spec;
  ShootingConfig shooting;
  CertificateTolerances tolerances;
  std::filesystem::path out_dir = "qlgs_out";
  OutputFormat format = OutputFormat::Json;
  std::optional<SweepRanges> sweep;
  ProblemBlocks blocks;
};

/// JSON with comments. Throws ConfigError.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Rebuilds operator and nonlinearity from the blocks with the given fields
/// replaced (sweep cells). alpha needs pure_power, k needs a "bi" operator.
Config with_overrides(const Config& base, std::optional<double> alpha, std::optional<int> k,
                      std::optional<double> beta, std::optional<int> dimension);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Output directory: QLGS_OUT if set, else the configured one.
std::filesystem::path resolve_out_dir(const Config& cfg);

struct ProfileMeta {
  std::string operator_hash;
  std::string nonlinearity_hash;
};

ProfileMeta meta_of(const Config& cfg);

void write_profile_json(std::ostream& os, const Profile& profile, const ProfileMeta& meta,
                        const OperatorSpec& op);
void write_profile_csv(std::ostream& os, const Profile& profile);

struct StoredProfile {
  ProfileMeta meta;
  Profile profile;
};

/// Throws Error on unreadable or inconsistent files.
StoredProfile read_profile_json(const std::filesystem::path& path);

std::string certificate_json(const CertificateReport& rep, const CertificateTolerances& tol);
std::string path_report_json(const PathReport& rep);
std::string nonexistence_json(const NonexistenceCertificate& cert);

void write_scan(std::ostream& os, const std::vector<ScanRow>& rows, OutputFormat format);
std::string side_name(Side side);

/// Writes text to path, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qlgs

#endif  // QLGS_IO_HPP
