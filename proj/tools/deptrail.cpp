#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deptrail/deptrail.hpp"

namespace fs = std::filesystem;
using namespace deptrail;

namespace {

RunConfig load_config(const std::string& config_file, const std::vector<std::string>& sets) {
  RunConfig cfg;
  if (!config_file.empty()) cfg.parse_file(config_file);
  for (const auto& s : sets) cfg.apply_assignment(s);
  return cfg;
}

int cmd_ingest(const std::string& src, const std::string& format, const std::string& out) {
  const DatasetFormat fmt = format == "msr_bin" ? DatasetFormat::MsrBin
                                                : DatasetFormat::Canonical;
  require(format == "msr_bin" || format == "canonical", ErrorCode::InvalidArgument,
          "format must be msr_bin or canonical");
  const std::string ext = fmt == DatasetFormat::MsrBin ? ".bin" : ".dseq";

  std::map<std::string, SampleName> manifest;
  if (fs::exists(fs::path(src) / "manifest.tsv"))
    manifest = read_manifest(fs::path(src) / "manifest.tsv");

  fs::create_directories(out);
  int converted = 0;
  int failed = 0;
  for (const auto& file : list_files(src, ext)) {
    try {
      const DepthSequence seq = fmt == DatasetFormat::MsrBin
                                    ? load_msr_file(file, manifest)
                                    : load_canonical_file(file);
      save_canonical_file(fs::path(out) / (seq.id() + ".dseq"), seq);
      ++converted;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s: %s\n", file.string().c_str(), e.what());
      ++failed;
    }
  }
  std::printf("%d\n", converted);
  return failed > 0 ? 2 : 0;
}

int cmd_synth(const std::string& config_file, const std::vector<std::string>& sets,
              const std::string& out_override) {
  const RunConfig cfg = load_config(config_file, sets);
  const SynthSpec spec = cfg.synth();
  const fs::path out = out_override.empty() ? cfg.out_dir() : fs::path(out_override);
  fs::create_directories(out);
  int count = 0;
  for (const DepthSequence& seq : generate(spec)) {
    save_canonical_file(out / (seq.id() + ".dseq"), seq);
    ++count;
  }
  std::printf("%d\n", count);
  return 0;
}

int cmd_mtm(const std::string& seq_file, const std::string& config_file,
            const std::vector<std::string>& sets, const std::string& out) {
  const RunConfig cfg = load_config(config_file, sets);
  const DepthSequence seq = load_canonical_file(seq_file);
  const MtmOutput mtm = compute_mtm(seq, cfg.pipeline().mtm);
  fs::create_directories(out);
  for (TemplateKind kind : {TemplateKind::MHI, TemplateKind::SHI}) {
    for (Plane plane : {Plane::xOy, Plane::yOz, Plane::xOz}) {
      const HistoryImage& h = mtm.get(plane, kind);
      write_file_bytes(fs::path(out) / pgm_filename(mtm.sample_id, plane, kind),
                       history_to_pgm(h));
    }
  }
  std::printf("%s\n", mtm.sample_id.c_str());
  return 0;
}

EvalReport run_from_config(const RunConfig& cfg) {
  const fs::path data_dir = cfg.dataset_dir();
  require(!data_dir.empty(), ErrorCode::InvalidArgument,
          "no dataset directory (set dataset.dir or DEPTRAIL_DATA)");
  const std::vector<DepthSequence> dataset = load_directory(data_dir, cfg.dataset_format());
  require(!dataset.empty(), ErrorCode::EmptyInput,
          "no samples under " + data_dir.string());
  EvalReport report = run_experiment(dataset, cfg.protocol(), cfg.pipeline());
  report.config_echo = cfg.resolved();
  return report;
}

int cmd_run(const std::string& config_file, const std::vector<std::string>& sets) {
  const RunConfig cfg = load_config(config_file, sets);
  const EvalReport report = run_from_config(cfg);
  write_reports(report, cfg.out_dir());
  std::printf("accuracy %.6f (%zu train, %zu test, k=%d)\n", report.accuracy,
              report.train_count, report.test_count, report.reduced_dim);
  return 0;
}

int cmd_tune(const std::string& config_file, const std::vector<std::string>& sets) {
  const RunConfig cfg = load_config(config_file, sets);
  const fs::path data_dir = cfg.dataset_dir();
  require(!data_dir.empty(), ErrorCode::InvalidArgument,
          "no dataset directory (set dataset.dir or DEPTRAIL_DATA)");
  const std::vector<DepthSequence> dataset = load_directory(data_dir, cfg.dataset_format());

  const TuneResult result = tune_grid_search(
      dataset, cfg.protocol(), cfg.pipeline(), cfg.get_int_list("tune.bins"),
      cfg.get_int_list("tune.delta_r"), cfg.get_grid_list("tune.grid"),
      cfg.get_double_list("tune.mu"), cfg.get_int("tune.folds"));

  fs::create_directories(cfg.out_dir());
  const std::string csv = render_tune_csv(result);
  write_file_bytes(cfg.out_dir() / "tune.csv",
                   {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  const TuneCell& best = result.cells[result.best];
  std::printf("best: bins=%d delta_r=%d grid=%dx%d mu=%g cv_accuracy=%.6f\n", best.bins,
              best.delta_r, best.spatial_rows, best.spatial_cols, best.mu, best.cv_accuracy);
  return 0;
}

int cmd_report(const std::string& predictions_file, const std::string& out) {
  const auto bytes = read_file_bytes(predictions_file);
  const std::string text(bytes.begin(), bytes.end());

  std::vector<int> truths;
  std::vector<int> preds;
  std::size_t start = text.find('\n');  // skip header
  require(start != std::string::npos, ErrorCode::ParseError, "missing header row");
  ++start;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos, ErrorCode::ParseError,
            "expected seq_id,true_class,predicted_class columns");
    auto c3 = line.find(',', c2 + 1);
    if (c3 == std::string::npos) c3 = line.size();
    truths.push_back(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)));
    preds.push_back(std::stoi(line.substr(c2 + 1, c3 - c2 - 1)));
  }
  require(!truths.empty(), ErrorCode::EmptyInput, "no prediction rows");

  std::set<int> labels(truths.begin(), truths.end());
  labels.insert(preds.begin(), preds.end());
  EvalReport report;
  report.class_ids.assign(labels.begin(), labels.end());
  const auto dense = [&](int label) {
    return static_cast<int>(std::lower_bound(report.class_ids.begin(), report.class_ids.end(),
                                             label) -
                            report.class_ids.begin()) +
           1;
  };
  std::vector<int> dtruths;
  std::vector<int> dpreds;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    dtruths.push_back(dense(truths[i]));
    dpreds.push_back(dense(preds[i]));
  }
  report.confusion = confusion_matrix(dtruths, dpreds, static_cast<int>(report.class_ids.size()));
  report.accuracy = average_accuracy(report.confusion);
  report.class_weighted = class_weighted_accuracy(report.confusion);
  report.test_count = truths.size();

  std::string csv = "metric,value\n";
  csv += "average_accuracy," + detail::format_fraction(report.accuracy) + "\n";
  csv += "class_weighted_accuracy," + detail::format_fraction(report.class_weighted) + "\n";
  csv += "test_count," + std::to_string(report.test_count) + "\n";
  for (const auto& [d, acc] : per_class_accuracy(report.confusion))
    csv += "class_" + std::to_string(report.class_ids[static_cast<std::size_t>(d - 1)]) +
           "_accuracy," + detail::format_fraction(acc) + "\n";

  fs::create_directories(out);
  write_file_bytes(fs::path(out) / "report.csv",
                   {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  const std::string conf = render_confusion_csv(report);
  write_file_bytes(fs::path(out) / "confusion.csv",
                   {reinterpret_cast<const std::uint8_t*>(conf.data()), conf.size()});
  std::printf("accuracy %.6f (%zu samples)\n", report.accuracy, report.test_count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-video action recognition: temporal templates, gradient"
               " autocorrelation features, collaborative-representation classification"};
  app.require_subcommand(1);

  std::string src_dir;
  std::string format = "msr_bin";
  std::string out_dir = "out";
  auto* ingest = app.add_subcommand("ingest", "Convert a dataset directory to canonical files");
  ingest->add_option("src", src_dir, "source directory")->required();
  ingest->add_option("--format", format, "msr_bin or canonical");
  ingest->add_option("--out", out_dir, "output directory");

  std::string config_file;
  std::vector<std::string> sets;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic dataset");
  synth->add_option("config", config_file, "config file");
  synth->add_option("--set", sets, "key=value override");
  synth->add_option("--out", synth_out, "output directory (overrides out.dir)");

  std::string seq_file;
  auto* mtm = app.add_subcommand("mtm", "Write the six motion/static history images as PGM");
  mtm->add_option("seq", seq_file, "canonical sequence file")->required();
  mtm->add_option("--config", config_file, "config file");
  mtm->add_option("--set", sets, "key=value override");
  mtm->add_option("--out", out_dir, "output directory");

  auto* run = app.add_subcommand("run", "Run an experiment and write report files");
  run->add_option("config", config_file, "config file");
  run->add_option("--set", sets, "key=value override");

  auto* tune = app.add_subcommand("tune", "Cross-validated grid search on the training split");
  tune->add_option("config", config_file, "config file");
  tune->add_option("--set", sets, "key=value override");

  std::string predictions_file;
  auto* report = app.add_subcommand("report", "Rebuild metrics from a predictions file");
  report->add_option("predictions", predictions_file, "predictions.csv path")->required();
  report->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(src_dir, format, out_dir);
    if (synth->parsed()) return cmd_synth(config_file, sets, synth_out);
    if (mtm->parsed()) return cmd_mtm(seq_file, config_file, sets, out_dir);
    if (run->parsed()) return cmd_run(config_file, sets);
    if (tune->parsed()) return cmd_tune(config_file, sets);
    if (report->parsed()) return cmd_report(predictions_file, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
