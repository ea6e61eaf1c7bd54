#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wasabi/pipeline.hpp"
#include "wasabi/retrieval.hpp"
#include "wasabi/synth.hpp"

// Batch drivers behind the CLI subcommands.  Exit codes: 0 success,
// 1 total failure, 2 partial (some images skipped; skips are logged).
namespace wasabi::app {

// Files or directories; directories are scanned for *.pgm / *.txt label
// maps.  The image id is the filename stem.
std::vector<std::filesystem::path> collect_label_maps(
    const std::vector<std::filesystem::path>& inputs);

struct DescribeOptions {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output;  // descriptor database file
  std::filesystem::path poses;   // optional poses CSV folded into the database
  PipelineConfig pipeline;
  int jobs = 0;  // 0 = hardware concurrency
};
int run_describe(const DescribeOptions& opt, std::ostream& log);

struct RetrieveOptions {
  std::filesystem::path database;
  std::vector<std::filesystem::path> queries;  // label-map files or directories
  std::filesystem::path output;                // ranking CSV
  int k = 20;
  PipelineConfig pipeline;
  MatchingConfig matching;
  int jobs = 0;
};
int run_retrieve(const RetrieveOptions& opt, std::ostream& log);

struct EvalOptions {
  std::filesystem::path ranking;      // ranking CSV from retrieve
  std::filesystem::path query_poses;  // poses CSV
  std::filesystem::path db_poses;     // poses CSV
  std::filesystem::path output;       // metrics CSV; empty = stdout table only
  EvalConfig eval;
};
int run_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log);

struct SynthOptions {
  std::filesystem::path spec_file;  // JSON scene/corpus description
  std::filesystem::path outdir;
  std::string format = "pgm";  // "pgm" or "txt"
  int jobs = 0;
};
int run_synth(const SynthOptions& opt, std::ostream& log);

}  // namespace wasabi::app
