#pragma once

#include <optional>
#include <string>

#include "disagg/config.hpp"

namespace disagg::cli {

// exit codes shared by every subcommand:
//   0 success, 2 input or configuration error, 3 sampler abort,
//   4 chain ESS below the configured floor
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSampler = 3;
inline constexpr int kExitEss = 4;

struct CommonOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> chains;
    std::string model = "proposed";  // proposed | standard-binomial
};

int cmd_simulate(const Config& cfg, const CommonOverrides& ov);
int cmd_fit(const Config& cfg, const CommonOverrides& ov);
int cmd_predict(const std::string& draws_path, const std::string& supports_path,
                const std::string& out_path);
int cmd_validate(const std::string& predictions_path, const std::string& truth_path,
                 const std::string& out_path, const std::string& label);
int cmd_summarize(const std::string& draws_path, const std::string& targets,
                  const std::string& out_dir, const std::string& estimates_path);

}  // namespace disagg::cli
