#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iclap/descriptors.hpp"
#include "iclap/registration.hpp"

namespace iclap::cli {

enum class Command { Synth, Dictionary, Models, Classify, Evaluate };

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMissingInput = 3;

struct RunConfig {
  Command command = Command::Evaluate;
  std::filesystem::path dataset_root;
  std::filesystem::path codebook_path;
  std::filesystem::path models_dir;
  std::filesystem::path test_path;
  std::filesystem::path output;
  std::filesystem::path confusion_output;

  DescriptorKind kind = DescriptorKind::ZernikeMoments;
  int order = 4;
  int k = 50;
  int kmeans_iters = 100;
  bool standardize = false;
  double w_scale = 1.0;
  std::uint64_t seed = 1;
  /// iclap, icp3, bow or all.
  std::string method = "all";
  /// "a..b", a comma list, or one integer.
  std::string m_range = "1,2,4,8,12";
  int trials = 5;
  IcpParams icp;
  bool sanity = false;
  bool prefix = false;

  int objects = 10;
  int explorations = 5;
  int touches = 60;
  double position_noise = 0.5;
  double pressure_noise = 0.02;
};

/// Expands an m range. Throws ArgumentError on malformed or non-positive input.
std::vector<int> parse_m_range(const std::string& text);

/// Checks every numeric field and the method/command combination. Throws
/// ArgumentError describing the first problem.
void validate(const RunConfig& config);

/// Executes one command. Messages go to `out`, diagnostics to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace iclap::cli
