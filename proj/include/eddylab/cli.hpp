// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eddylab/report.hpp"

namespace eddylab::cli {

/// Process exit codes. 0 to 3 are a stable contract; 4 marks a study that
/// ran to completion but missed at least one check.
enum ExitCode : int {
  kPass = 0,
  kUsage = 1,
  kModelInvalid = 2,
  kSolverFailure = 3,
  kChecksFailed = 4,
};

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_run(const std::string& path, const std::string& study,
            const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out, std::ostream& err);
/// axis: rho, tau or grid (integer refinement factors).
int cmd_sweep(const std::string& path, const std::string& axis,
              const std::vector<std::string>& values, const std::filesystem::path& out_dir,
              std::optional<std::string> study, std::ostream& out, std::ostream& err);

/// report.json plus one CSV per table.
void write_report(const StudyReport& report, const std::filesystem::path& out_dir);

int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace eddylab::cli
