#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wasabi/app.hpp"
#include "wasabi/errors.hpp"

namespace {

struct PipelineFlags {
  wasabi::PipelineConfig cfg;
  std::vector<std::int32_t> dynamic_classes;
  std::string dynamic_classes_file;
  int connectivity = 4;
  int jobs = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--min-blob-size", cfg.cleanup.min_blob_size,
                    "Merge connected components smaller than this many pixels")
        ->capture_default_str();
    cmd->add_option("--dynamic-class", dynamic_classes,
                    "Class id to strip before description (repeatable)");
    cmd->add_option("--dynamic-classes-file", dynamic_classes_file,
                    "File with one dynamic class id per line");
    cmd->add_option("--connectivity", connectivity, "Pixel connectivity for components")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();
    cmd->add_option("--min-edge-size", cfg.edges.min_edge_size,
                    "Drop semantic edges shorter than this many points")
        ->capture_default_str();
    cmd->add_option("--min-neighbour-gap", cfg.edges.min_neighbour_gap,
                    "Reconnect edge endpoints closer than this distance in pixels")
        ->capture_default_str();
    cmd->add_option("-N,--resample", cfg.descriptor.resample_count,
                    "Number of points each edge is resampled to")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--levels", cfg.descriptor.levels, "Haar cascade depth per coordinate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--normalize-coords", cfg.descriptor.normalize_coords,
                  "Divide edge coordinates by image extent before describing");
    cmd->add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)")->capture_default_str();
  }

  void finalize() {
    cfg.cleanup.dynamic_classes.insert(dynamic_classes.begin(), dynamic_classes.end());
    if (!dynamic_classes_file.empty()) {
      const auto extra = wasabi::read_class_set(dynamic_classes_file);
      cfg.cleanup.dynamic_classes.insert(extra.begin(), extra.end());
    }
    cfg.cleanup.connectivity =
        connectivity == 8 ? wasabi::Connectivity::eight : wasabi::Connectivity::four;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WASABI: wavelet-based semantic-edge descriptors for place recognition"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML config file; flags override it");

  auto* describe = app.add_subcommand(
      "describe", "Compute descriptors for label maps and store them in a database file");
  wasabi::app::DescribeOptions dopt;
  PipelineFlags dflags;
  describe->add_option("inputs", dopt.inputs, "Label-map files or directories")
      ->required()
      ->expected(-1);
  describe->add_option("-o,--output", dopt.output, "Descriptor database file to write")
      ->required();
  describe->add_option("--poses", dopt.poses, "Poses CSV (id,x,y,z) folded into the database");
  dflags.attach(describe);

  auto* retrieve = app.add_subcommand(
      "retrieve", "Rank database entries against query label maps");
  wasabi::app::RetrieveOptions ropt;
  PipelineFlags rflags;
  retrieve->add_option("-d,--database", ropt.database, "Descriptor database file")->required();
  retrieve->add_option("queries", ropt.queries, "Query label-map files or directories")
      ->required()
      ->expected(-1);
  retrieve->add_option("-o,--output", ropt.output, "Ranking CSV to write")->required();
  retrieve->add_option("-k,--top-k", ropt.k, "Ranking depth per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  retrieve
      ->add_option("--unmatched-penalty", ropt.matching.unmatched_penalty,
                   "Cost per unmatched edge when images have unequal edge counts")
      ->capture_default_str();
  rflags.attach(retrieve);

  auto* eval = app.add_subcommand("eval", "Score a ranking CSV against pose ground truth");
  wasabi::app::EvalOptions eopt;
  eval->add_option("-r,--ranking", eopt.ranking, "Ranking CSV from retrieve")->required();
  eval->add_option("--query-poses", eopt.query_poses, "Query poses CSV")->required();
  eval->add_option("--db-poses", eopt.db_poses, "Database poses CSV")->required();
  eval->add_option("-o,--output", eopt.output, "Metrics CSV to write");
  eval->add_option("--epsilon", eopt.eval.epsilon,
                   "Max camera-center distance in meters for a correct match")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--recall-ns", eopt.eval.recall_ns, "Ranking depths for recall@N")
      ->delimiter(',')
      ->capture_default_str();

  auto* synth = app.add_subcommand(
      "synth", "Render synthetic label maps and poses from a JSON scene file");
  wasabi::app::SynthOptions sopt;
  synth->add_option("spec", sopt.spec_file, "JSON scene/corpus description")->required();
  synth->add_option("-o,--outdir", sopt.outdir, "Output directory")->required();
  synth->add_option("--format", sopt.format, "Label-map file format")
      ->check(CLI::IsMember({"pgm", "txt"}))
      ->capture_default_str();
  synth->add_option("-j,--jobs", sopt.jobs, "Worker threads (0 = all cores)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (describe->parsed()) {
      dflags.finalize();
      dopt.pipeline = dflags.cfg;
      dopt.jobs = dflags.jobs;
      return wasabi::app::run_describe(dopt, std::cerr);
    }
    if (retrieve->parsed()) {
      rflags.finalize();
      ropt.pipeline = rflags.cfg;
      ropt.jobs = rflags.jobs;
      return wasabi::app::run_retrieve(ropt, std::cerr);
    }
    if (eval->parsed()) {
      std::sort(eopt.eval.recall_ns.begin(), eopt.eval.recall_ns.end());
      return wasabi::app::run_eval(eopt, std::cout, std::cerr);
    }
    if (synth->parsed()) return wasabi::app::run_synth(sopt, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
