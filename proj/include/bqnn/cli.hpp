/* Copyright 2026 The bqnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BQNN_CLI_HPP_
#define BQNN_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

namespace bqnn {

// Exit statuses: 0 ok, 1 I/O or container, 2 validation (and bad usage),
// 3 lowering or accelerator mapping, 4 internal.
struct CliOptions {
  std::string model;
  std::string out;
  std::string input;  // raw little-endian f32, depth-innermost (H, W, C)
  std::string arch = "toy";
  std::string format = "text";
  std::string ordering = "both";
  std::uint64_t seed = 42;
  int threads = 0;  // 0: all cores
  int repeats = 5;
  std::int64_t pe_budget = std::int64_t{1} << 20;
  bool allow_warnings = false;
  bool compare_f32 = false;
};

int cmd_compile(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_validate(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_run(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_bench(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_accel_report(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_emit_c(const CliOptions& o, std::ostream& out, std::ostream& err);
int cmd_gen_fixture(const CliOptions& o, std::ostream& out, std::ostream& err);

// Parses argv (subcommand first) and dispatches.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bqnn

#endif  // BQNN_CLI_HPP_
