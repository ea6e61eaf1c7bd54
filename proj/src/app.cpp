#include "wasabi/app.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <utility>

#include "wasabi/errors.hpp"
#include "wasabi/rng.hpp"

namespace wasabi::app {

namespace fs = std::filesystem;

std::vector<fs::path> collect_label_maps(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<fs::path> here;
      for (const auto& entry : fs::directory_iterator(input)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".pgm" || ext == ".txt") here.push_back(entry.path());
      }
      std::sort(here.begin(), here.end());
      out.insert(out.end(), here.begin(), here.end());
    } else if (fs::is_regular_file(input)) {
      out.push_back(input);
    } else {
      throw IoError("no such file or directory: " + input.string());
    }
  }
  return out;
}

namespace {

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t workers =
      jobs > 0 ? static_cast<std::size_t>(jobs)
               : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

// Describes every map in parallel; failures are logged and left empty so the
// caller can decide between partial and total failure.
std::vector<std::optional<ImageDescriptor>> describe_many(const std::vector<fs::path>& paths,
                                                          const PipelineConfig& cfg, int jobs,
                                                          std::ostream& log) {
  std::vector<std::optional<ImageDescriptor>> out(paths.size());
  std::mutex log_mutex;
  parallel_for(paths.size(), jobs, [&](std::size_t i) {
    try {
      const LabelMap map = read_label_map(paths[i]);
      out[i] = describe_image(paths[i].stem().string(), map, cfg);
    } catch (const std::exception& e) {
      std::lock_guard lock(log_mutex);
      log << "warning: skipping " << paths[i].string() << ": " << e.what() << '\n';
    }
  });
  return out;
}

void ensure_parent_dir(const fs::path& file) {
  const fs::path dir = file.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

}  // namespace

int run_describe(const DescribeOptions& opt, std::ostream& log) {
  const auto paths = collect_label_maps(opt.inputs);
  if (paths.empty()) {
    log << "error: no label maps found\n";
    return 1;
  }
  auto described = describe_many(paths, opt.pipeline, opt.jobs, log);
  std::vector<ImageDescriptor> images;
  for (auto& d : described)
    if (d) images.push_back(std::move(*d));
  if (images.empty()) {
    log << "error: no image could be described\n";
    return 1;
  }
  std::optional<std::map<std::string, Pose>> poses;
  if (!opt.poses.empty()) poses = read_poses_csv(opt.poses);
  const auto db = RetrievalDatabase::build(std::move(images), poses ? &*poses : nullptr);
  ensure_parent_dir(opt.output);
  save_database(opt.output, db);
  log << "described " << db.size() << " of " << paths.size() << " images -> "
      << opt.output.string() << '\n';
  return db.size() == paths.size() ? 0 : 2;
}

int run_retrieve(const RetrieveOptions& opt, std::ostream& log) {
  if (opt.k < 1) throw std::invalid_argument("k must be >= 1");
  const auto db = load_database(opt.database);
  const auto paths = collect_label_maps(opt.queries);
  if (paths.empty()) {
    log << "error: no query label maps found\n";
    return 1;
  }
  auto described = describe_many(paths, opt.pipeline, opt.jobs, log);
  std::vector<ImageDescriptor> queries;
  for (auto& d : described)
    if (d) queries.push_back(std::move(*d));
  if (queries.empty()) {
    log << "error: no query could be described\n";
    return 1;
  }
  std::sort(queries.begin(), queries.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  std::vector<QueryRun> runs(queries.size());
  parallel_for(queries.size(), opt.jobs, [&](std::size_t i) {
    runs[i] = QueryRun{queries[i].image_id,
                       query(db, queries[i], static_cast<std::size_t>(opt.k), opt.matching)};
  });
  ensure_parent_dir(opt.output);
  write_ranking_csv(opt.output, runs);
  log << "ranked " << runs.size() << " of " << paths.size() << " queries against "
      << db.size() << " database entries -> " << opt.output.string() << '\n';
  return runs.size() == paths.size() ? 0 : 2;
}

int run_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log) {
  const auto run = read_ranking_csv(opt.ranking);
  const auto query_poses = read_poses_csv(opt.query_poses);
  const auto db_poses = read_poses_csv(opt.db_poses);
  const auto recall = recall_at_n(run, query_poses, db_poses, opt.eval);
  std::optional<double> map_pct;
  try {
    map_pct = mean_average_precision(run, query_poses, db_poses, opt.eval);
  } catch (const NoRelevantAnywhereError& e) {
    log << "warning: mAP undefined: " << e.what() << '\n';
  }
  print_metrics_table(out, recall, map_pct);
  if (!opt.output.empty()) {
    ensure_parent_dir(opt.output);
    write_metrics_csv(opt.output, recall, map_pct);
  }
  return map_pct ? 0 : 2;
}

int run_synth(const SynthOptions& opt, std::ostream& log) {
  if (opt.format != "pgm" && opt.format != "txt")
    throw std::invalid_argument("format must be 'pgm' or 'txt'");
  const SynthJob job = read_synth_job(opt.spec_file);
  std::vector<SceneSpec> scenes;
  if (job.corpus) scenes = generate_corpus(*job.corpus);
  scenes.insert(scenes.end(), job.scenes.begin(), job.scenes.end());
  if (scenes.empty()) {
    log << "error: spec file defines no scenes\n";
    return 1;
  }
  const CorpusSpec defaults;
  const double spacing = job.corpus ? job.corpus->pose_spacing : defaults.pose_spacing;
  const std::string ext = "." + opt.format;

  fs::create_directories(opt.outdir / "db");
  if (job.perturbation) fs::create_directories(opt.outdir / "query");

  std::vector<std::string> ids(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i)
    ids[i] = scene_id(job.corpus ? *job.corpus : defaults, static_cast<int>(i));

  std::mutex log_mutex;
  std::atomic<std::size_t> failed{0};
  std::vector<char> ok(scenes.size(), 0);
  parallel_for(scenes.size(), opt.jobs, [&](std::size_t i) {
    try {
      write_label_map(opt.outdir / "db" / (ids[i] + ext), render_scene(scenes[i]));
      if (job.perturbation) {
        PerturbationSpec p = *job.perturbation;
        p.seed = mix_seed(job.perturbation->seed, static_cast<std::uint64_t>(i));
        write_label_map(opt.outdir / "query" / (ids[i] + ext), perturb_scene(scenes[i], p));
      }
      ok[i] = 1;
    } catch (const std::exception& e) {
      failed.fetch_add(1);
      std::lock_guard lock(log_mutex);
      log << "warning: skipping scene " << ids[i] << ": " << e.what() << '\n';
    }
  });
  if (failed == scenes.size()) {
    log << "error: no scene could be rendered\n";
    return 1;
  }

  std::map<std::string, Pose> poses;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    if (ok[i]) poses[ids[i]] = Pose{spacing * static_cast<double>(i), 0.0, 0.0};
  write_poses_csv(opt.outdir / "db_poses.csv", poses);
  if (job.perturbation) write_poses_csv(opt.outdir / "query_poses.csv", poses);

  log << "rendered " << (scenes.size() - failed) << " of " << scenes.size() << " scenes -> "
      << opt.outdir.string() << '\n';
  return failed == 0 ? 0 : 2;
}

}  // namespace wasabi::app
