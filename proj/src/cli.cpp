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

#include "bqnn/cli.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "bqnn/accel_model.hpp"
#include "bqnn/bench.hpp"
#include "bqnn/codegen.hpp"
#include "bqnn/engine.hpp"
#include "bqnn/error.hpp"
#include "bqnn/fixtures.hpp"
#include "bqnn/model_ir.hpp"
#include "bqnn/parallel.hpp"
#include "bqnn/transform.hpp"

namespace bqnn {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 4;
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::Io, std::string("missing required flag ") + flag);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

// Lowered form of the model file, lowering it first if needed.
LoweredGraph load_lowered(const std::string& path) {
  const Graph g = read_model_file(path);
  return g.lowered ? graph_to_lowered(g) : lower_graph(g);
}

TensorBlob load_image(const CliOptions& o, const TensorDesc& input) {
  if (o.input.empty()) return random_image(input, o.seed);
  std::ifstream f(o.input, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open input '" + o.input + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const TensorDesc d{input.height, input.width, input.depth, 1, DType::F32, Layout::DepthInnermost};
  if (static_cast<std::int64_t>(bytes.size()) != 4 * d.elements())
    throw Error(ErrorCode::Io, "input '" + o.input + "' has " + std::to_string(bytes.size()) + " bytes, expected " +
                                   std::to_string(4 * d.elements()));
  std::vector<float> values(static_cast<std::size_t>(d.elements()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    std::memcpy(&values[i], &u, 4);
  }
  return TensorBlob(d, std::move(values));
}

void write_raw_f32(const std::string& path, const TensorBlob& t) {
  std::string bytes;
  bytes.reserve(t.size() * 4);
  for (float v : t.f32()) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  write_text(path, bytes);
}

std::string size_report_text(const SizeReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-9s %14s %14s\n", "layer", "kind", "dense_bytes", "packed_bytes");
  out << line;
  for (const auto& l : r.layers) {
    std::snprintf(line, sizeof line, "%-12s %-9s %14lld %14lld\n", l.node.c_str(), l.binarized ? "binconv" : "conv_f32",
                  static_cast<long long>(l.dense_bytes), static_cast<long long>(l.packed_bytes));
    out << line;
  }
  std::snprintf(line, sizeof line, "%-12s %-9s %14lld %14lld\ncompression ratio: %.3f\n", "total", "",
                static_cast<long long>(r.dense_total), static_cast<long long>(r.packed_total), r.ratio);
  out << line;
  return out.str();
}

// Prints diagnostics; returns the exit status they imply.
int report_diagnostics(const Diagnostics& d, bool allow_warnings, std::ostream& err) {
  for (const auto& x : d) err << format_diagnostic(x) << '\n';
  if (has_errors(d)) return 2;
  if (!d.empty() && !allow_warnings) return 2;
  return 0;
}

}  // namespace

int cmd_validate(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    const Graph g = read_model_file(o.model);
    const Diagnostics d = validate_graph(g);
    if (o.format == "json") {
      Json a = Json::array();
      for (const auto& x : d)
        a.push_back({{"severity", x.severity == Severity::Error ? "error" : "warning"},
                     {"node", x.node},
                     {"rule", x.rule},
                     {"message", x.message}});
      out << Json{{"diagnostics", a}}.dump(2) << '\n';
    } else if (d.empty()) {
      out << "ok: no diagnostics\n";
    }
    return report_diagnostics(d, o.allow_warnings, err);
  });
}

int cmd_compile(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    require(o.out, "--out");
    const Graph g = read_model_file(o.model);
    if (g.lowered) throw Error(ErrorCode::AlreadyLowered, "'" + o.model + "' is already lowered");
    const int status = report_diagnostics(validate_graph(g), o.allow_warnings, err);
    if (status != 0) return status;
    const LoweredGraph lg = lower_graph(g);
    write_model_file(o.out, lowered_to_graph(lg));
    const SizeReport r = model_size_report(g, lg);
    if (o.format == "json") {
      out << to_json(r).dump(2) << '\n';
    } else {
      out << size_report_text(r);
    }
    return 0;
  });
}

int cmd_run(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    const LoweredGraph lg = load_lowered(o.model);
    const TensorBlob image = load_image(o, lg.input);
    RunOptions options;
    options.threads = o.threads;
    const RunResult r = run_network(lg, image, options);
    if (!o.out.empty()) write_raw_f32(o.out, r.output);
    double sum = 0.0;
    for (float v : r.output.f32()) sum += v;
    const TensorDesc& d = r.output.desc();
    if (o.format == "json") {
      out << Json{{"height", d.height}, {"width", d.width}, {"depth", d.depth}, {"sum", sum}}.dump(2) << '\n';
    } else {
      out << "output " << d.height << "x" << d.width << "x" << d.depth << ", sum " << sum << '\n';
    }
    return 0;
  });
}

int cmd_bench(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    const LoweredGraph lg = load_lowered(o.model);
    const TensorBlob image = load_image(o, lg.input);
    const BenchReport r = bench_network(lg, image, o.repeats, resolve_threads(o.threads), o.compare_f32);
    if (o.format == "json") {
      out << to_json(r).dump(2) << '\n';
    } else {
      out << to_text(r);
    }
    return 0;
  });
}

int cmd_accel_report(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    if (o.ordering != "depth" && o.ordering != "width" && o.ordering != "both")
      throw Error(ErrorCode::Io, "--ordering must be depth, width or both");
    const LoweredGraph lg = load_lowered(o.model);
    AccelConfig budget;
    budget.local_mem_budget = o.pe_budget;
    const AccelConfig cfg = choose_pen(lg, budget);
    const OrderingReport r = compare_orderings(lg, cfg);
    const Json j = to_json(r, o.ordering);
    if (!o.out.empty()) {
      const bool csv = o.out.size() > 4 && o.out.substr(o.out.size() - 4) == ".csv";
      write_text(o.out, csv ? to_csv(r, o.ordering) : j.dump(2) + "\n");
    }
    if (o.format == "json") {
      out << j.dump(2) << '\n';
    } else {
      out << "PEN width P = " << cfg.num_parallel_kernels << "\n" << to_csv(r, o.ordering);
      if (o.ordering == "both") out << "transaction ratio (width / depth): " << r.transaction_ratio << '\n';
    }
    return 0;
  });
}

int cmd_emit_c(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.model, "--model");
    require(o.out, "--out");
    const std::string src = emit_inference_source(load_lowered(o.model));
    write_text(o.out, src);
    out << "wrote " << src.size() << " bytes to " << o.out << '\n';
    return 0;
  });
}

int cmd_gen_fixture(const CliOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(o.out, "--out");
    const Graph g = make_fixture(o.arch, o.seed);
    write_model_file(o.out, g);
    out << "wrote " << o.arch << " (seed " << o.seed << ") to " << o.out << '\n';
    return 0;
  });
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"bqnn: binarized CNN compiler, engine and accelerator model"};
  app.require_subcommand(1);
  CliOptions o;

  auto model = [&](CLI::App* c) { c->add_option("--model", o.model, "Model container file")->required(); };
  auto format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  };
  auto threads = [&](CLI::App* c) { c->add_option("--threads", o.threads, "Worker threads (0: all cores)"); };
  auto image = [&](CLI::App* c) {
    c->add_option("--input", o.input, "Raw little-endian f32 image, (H, W, C) depth-innermost");
    c->add_option("--seed", o.seed, "Seed of the random image used without --input");
  };

  CLI::App* compile = app.add_subcommand("compile", "Validate and lower a trained model");
  model(compile);
  compile->add_option("--out", o.out, "Lowered container to write")->required();
  compile->add_flag("--allow-warnings", o.allow_warnings, "Do not fail on warnings");
  format(compile);

  CLI::App* validate = app.add_subcommand("validate", "Report design-rule diagnostics");
  model(validate);
  validate->add_flag("--allow-warnings", o.allow_warnings, "Do not fail on warnings");
  format(validate);

  CLI::App* run = app.add_subcommand("run", "Run inference");
  model(run);
  run->add_option("--out", o.out, "Raw f32 output file");
  image(run);
  threads(run);
  format(run);

  CLI::App* bench = app.add_subcommand("bench", "Per-operation wall-clock report");
  model(bench);
  image(bench);
  threads(bench);
  bench->add_option("--repeats", o.repeats, "Timed runs")->check(CLI::PositiveNumber);
  bench->add_flag("--compare-f32", o.compare_f32, "Also time every binconv against a dense f32 conv of equal shape");
  format(bench);

  CLI::App* accel = app.add_subcommand("accel-report", "Accelerator cycle and memory-transaction model");
  model(accel);
  accel->add_option("--out", o.out, "Report file (.json or .csv)");
  accel->add_option("--ordering", o.ordering, "Orderings to report")->check(CLI::IsMember({"depth", "width", "both"}));
  accel->add_option("--pe-budget", o.pe_budget, "Local memory budget in bytes");
  format(accel);

  CLI::App* emit = app.add_subcommand("emit-c", "Emit a self-contained C inference unit");
  model(emit);
  emit->add_option("--out", o.out, "C source file")->required();

  CLI::App* gen = app.add_subcommand("gen-fixture", "Write a seeded random-weight model");
  gen->add_option("--arch", o.arch, "toy or darknet19_320");
  gen->add_option("--seed", o.seed, "Weight seed");
  gen->add_option("--out", o.out, "Container file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  if (*compile) return cmd_compile(o, out, err);
  if (*validate) return cmd_validate(o, out, err);
  if (*run) return cmd_run(o, out, err);
  if (*bench) return cmd_bench(o, out, err);
  if (*accel) return cmd_accel_report(o, out, err);
  if (*emit) return cmd_emit_c(o, out, err);
  return cmd_gen_fixture(o, out, err);
}

}  // namespace bqnn
