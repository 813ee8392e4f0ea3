#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "deptrail/crc.hpp"
#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/mtm.hpp"
#include "deptrail/parallel.hpp"
#include "deptrail/representation.hpp"

namespace deptrail {

enum class ProtocolName {
  MsrSubsetTest1,
  MsrSubsetTest2,
  MsrSubsetCross,
  MsrAllCross,
  DhaCross,
  UtdCross,
  Custom,
};

inline const char* to_string(ProtocolName p) {
  switch (p) {
    case ProtocolName::MsrSubsetTest1: return "msr_subset_test1";
    case ProtocolName::MsrSubsetTest2: return "msr_subset_test2";
    case ProtocolName::MsrSubsetCross: return "msr_subset_cross";
    case ProtocolName::MsrAllCross: return "msr_all_cross";
    case ProtocolName::DhaCross: return "dha_cross";
    case ProtocolName::UtdCross: return "utd_cross";
    case ProtocolName::Custom: return "custom";
  }
  return "?";
}

inline ProtocolName parse_protocol_name(const std::string& name) {
  for (ProtocolName p :
       {ProtocolName::MsrSubsetTest1, ProtocolName::MsrSubsetTest2, ProtocolName::MsrSubsetCross,
        ProtocolName::MsrAllCross, ProtocolName::DhaCross, ProtocolName::UtdCross,
        ProtocolName::Custom}) {
    if (name == to_string(p)) return p;
  }
  fail(ErrorCode::ParseError, "unknown protocol '" + name + "'");
}

enum class MsrSubset { AS1, AS2, AS3 };

inline const char* to_string(MsrSubset s) {
  switch (s) {
    case MsrSubset::AS1: return "AS1";
    case MsrSubset::AS2: return "AS2";
    case MsrSubset::AS3: return "AS3";
  }
  return "?";
}

inline MsrSubset parse_msr_subset(const std::string& name) {
  for (MsrSubset s : {MsrSubset::AS1, MsrSubset::AS2, MsrSubset::AS3})
    if (name == to_string(s)) return s;
  fail(ErrorCode::ParseError, "unknown subset '" + name + "'");
}

/// Published class lists for the three MSR-Action3D subsets.
inline const std::vector<int>& subset_classes(MsrSubset s) {
  static const std::vector<int> as1 = {2, 3, 5, 6, 10, 13, 18, 20};
  static const std::vector<int> as2 = {1, 4, 7, 8, 9, 11, 14, 12};
  static const std::vector<int> as3 = {6, 14, 15, 16, 17, 18, 19, 20};
  switch (s) {
    case MsrSubset::AS1: return as1;
    case MsrSubset::AS2: return as2;
    case MsrSubset::AS3: return as3;
  }
  return as1;
}

/// Split policy. The named protocols encode the standard benchmark splits;
/// custom takes an explicit subject list, an explicit sample-id list, or
/// resubstitution (train == test, smoke runs only).
struct Protocol {
  ProtocolName name = ProtocolName::Custom;
  std::optional<MsrSubset> subset;
  std::vector<int> train_subjects;
  std::vector<std::string> train_ids;
  bool resubstitution = false;

  void validate() const {
    const bool needs_subset = name == ProtocolName::MsrSubsetTest1 ||
                              name == ProtocolName::MsrSubsetTest2 ||
                              name == ProtocolName::MsrSubsetCross;
    require(subset.has_value() == needs_subset, ErrorCode::InvalidArgument,
            needs_subset ? "protocol requires a subset" : "protocol takes no subset");
    if (name == ProtocolName::Custom) {
      const int modes = (!train_subjects.empty() ? 1 : 0) + (!train_ids.empty() ? 1 : 0) +
                        (resubstitution ? 1 : 0);
      require(modes == 1, ErrorCode::InvalidArgument,
              "custom protocol needs exactly one of: train subjects, train ids, resubstitution");
    } else {
      require(train_subjects.empty() && train_ids.empty() && !resubstitution,
              ErrorCode::InvalidArgument, "split overrides are custom-protocol only");
    }
  }
};

struct SampleMeta {
  int action_id = 0;
  int subject_id = 0;
  int trial_id = 0;
  std::string sample_id;
};

inline SampleMeta meta_of(const DepthSequence& seq) {
  return {seq.action_id, seq.subject_id, seq.trial_id, seq.id()};
}

inline std::vector<SampleMeta> dataset_meta(const std::vector<DepthSequence>& dataset) {
  std::vector<SampleMeta> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset) out.push_back(meta_of(s));
  return out;
}

/// Train/test index lists into the original dataset order.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

namespace detail {

inline std::vector<std::size_t> subset_filter(const std::vector<SampleMeta>& meta,
                                              MsrSubset subset) {
  const auto& classes = subset_classes(subset);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < meta.size(); ++i)
    if (std::find(classes.begin(), classes.end(), meta[i].action_id) != classes.end())
      kept.push_back(i);
  for (int c : classes) {
    const bool present = std::any_of(kept.begin(), kept.end(),
                                     [&](std::size_t i) { return meta[i].action_id == c; });
    require(present, ErrorCode::EmptyClassAfterFilter,
            "class " + std::to_string(c) + " has no samples after subset filter");
  }
  return kept;
}

inline Split split_by_subjects(const std::vector<SampleMeta>& meta,
                               const std::vector<std::size_t>& pool,
                               const std::vector<int>& train_subjects) {
  Split split;
  for (std::size_t i : pool) {
    const bool in_train = std::find(train_subjects.begin(), train_subjects.end(),
                                    meta[i].subject_id) != train_subjects.end();
    (in_train ? split.train : split.test).push_back(i);
  }
  require(!split.train.empty(), ErrorCode::UnknownSubject,
          "no training subjects present in dataset");
  require(!split.test.empty(), ErrorCode::InvalidArgument, "empty test split");
  return split;
}

/// Per class: order samples by (subject, trial, id) and take the first
/// ceil(N * num / den) as training.
inline Split split_fractional(const std::vector<SampleMeta>& meta,
                              const std::vector<std::size_t>& pool, int num, int den) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i : pool) by_class[meta[i].action_id].push_back(i);

  Split split;
  for (auto& [cls, members] : by_class) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(meta[a].subject_id, meta[a].trial_id, meta[a].sample_id) <
             std::tie(meta[b].subject_id, meta[b].trial_id, meta[b].sample_id);
    });
    const std::size_t n_train =
        (members.size() * static_cast<std::size_t>(num) + static_cast<std::size_t>(den) - 1) /
        static_cast<std::size_t>(den);
    for (std::size_t j = 0; j < members.size(); ++j)
      (j < n_train ? split.train : split.test).push_back(members[j]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  require(!split.test.empty(), ErrorCode::InvalidArgument, "empty test split");
  return split;
}

}  // namespace detail

inline Split make_split(const std::vector<SampleMeta>& meta, const Protocol& protocol) {
  protocol.validate();
  require(!meta.empty(), ErrorCode::EmptyInput, "empty dataset");

  std::vector<std::size_t> pool(meta.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  if (protocol.subset) pool = detail::subset_filter(meta, *protocol.subset);

  static const std::vector<int> msr_train = {1, 3, 5, 7, 9};
  static const std::vector<int> dha_train = {1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21};
  static const std::vector<int> utd_train = {1, 3, 5, 7};

  switch (protocol.name) {
    case ProtocolName::MsrSubsetTest1:
      return detail::split_fractional(meta, pool, 1, 3);
    case ProtocolName::MsrSubsetTest2:
      return detail::split_fractional(meta, pool, 2, 3);
    case ProtocolName::MsrSubsetCross:
    case ProtocolName::MsrAllCross:
      return detail::split_by_subjects(meta, pool, msr_train);
    case ProtocolName::DhaCross:
      return detail::split_by_subjects(meta, pool, dha_train);
    case ProtocolName::UtdCross:
      return detail::split_by_subjects(meta, pool, utd_train);
    case ProtocolName::Custom: break;
  }

  if (protocol.resubstitution) return {pool, pool};

  if (!protocol.train_ids.empty()) {
    std::set<std::string> wanted(protocol.train_ids.begin(), protocol.train_ids.end());
    Split split;
    for (std::size_t i : pool) {
      if (wanted.erase(meta[i].sample_id) > 0)
        split.train.push_back(i);
      else
        split.test.push_back(i);
    }
    if (!wanted.empty())
      fail(ErrorCode::InvalidArgument, "train id '" + *wanted.begin() + "' not in dataset");
    require(!split.test.empty(), ErrorCode::InvalidArgument, "empty test split");
    return split;
  }

  for (int s : protocol.train_subjects) {
    const bool present = std::any_of(pool.begin(), pool.end(), [&](std::size_t i) {
      return meta[i].subject_id == s;
    });
    require(present, ErrorCode::UnknownSubject,
            "train subject " + std::to_string(s) + " not in dataset");
  }
  return detail::split_by_subjects(meta, pool, protocol.train_subjects);
}

/// Counts with rows = actual class, cols = predicted class, both 1-based
/// labels mapped to 0-based indices.
inline std::vector<std::vector<long long>> confusion_matrix(const std::vector<int>& truths,
                                                            const std::vector<int>& preds,
                                                            int num_classes) {
  require(truths.size() == preds.size(), ErrorCode::LengthMismatch,
          "truth/prediction length mismatch");
  require(num_classes >= 1, ErrorCode::InvalidArgument, "need at least one class");
  std::vector<std::vector<long long>> m(
      static_cast<std::size_t>(num_classes),
      std::vector<long long>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < truths.size(); ++i) {
    require(truths[i] >= 1 && truths[i] <= num_classes, ErrorCode::LabelOutOfRange,
            "actual label " + std::to_string(truths[i]) + " outside 1.." +
                std::to_string(num_classes));
    require(preds[i] >= 1 && preds[i] <= num_classes, ErrorCode::LabelOutOfRange,
            "predicted label " + std::to_string(preds[i]) + " outside 1.." +
                std::to_string(num_classes));
    ++m[static_cast<std::size_t>(truths[i] - 1)][static_cast<std::size_t>(preds[i] - 1)];
  }
  return m;
}

/// Diagonal over row sum, skipping classes with no test samples.
inline std::map<int, double> per_class_accuracy(
    const std::vector<std::vector<long long>>& confusion) {
  std::map<int, double> out;
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    long long row = 0;
    for (long long v : confusion[r]) row += v;
    if (row > 0) out[static_cast<int>(r) + 1] = static_cast<double>(confusion[r][r]) / row;
  }
  return out;
}

/// Sample-weighted accuracy: trace over total count.
inline double average_accuracy(const std::vector<std::vector<long long>>& confusion) {
  long long correct = 0;
  long long total = 0;
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    correct += confusion[r][r];
    for (long long v : confusion[r]) total += v;
  }
  require(total > 0, ErrorCode::EmptyInput, "empty confusion matrix");
  return static_cast<double>(correct) / total;
}

/// Unweighted mean of the per-class accuracies (classes with test samples).
inline double class_weighted_accuracy(const std::vector<std::vector<long long>>& confusion) {
  const auto per_class = per_class_accuracy(confusion);
  require(!per_class.empty(), ErrorCode::EmptyInput, "empty confusion matrix");
  double sum = 0.0;
  for (const auto& [cls, acc] : per_class) sum += acc;
  return sum / static_cast<double>(per_class.size());
}

/// Feature and classifier settings for one experiment run.
struct PipelineConfig {
  MtmConfig mtm;
  TemplatePrep prep;
  GlacConfig glac;
  FeatureSet features = FeatureSet::Fused;
  double mu = 0.0001;
  double retention = 0.99;
  int workers = 0;

  void validate() const {
    mtm.validate();
    glac.validate();
    require(prep.rows >= 2 && prep.cols >= 2, ErrorCode::InvalidArgument,
            "template size must be at least 2x2");
    require(mu > 0.0, ErrorCode::InvalidArgument, "mu must be positive");
    require(retention > 0.0 && retention <= 1.0, ErrorCode::InvalidArgument,
            "retention must be in (0, 1]");
  }
};

struct PredictionRow {
  std::string sample_id;
  int actual = 0;
  int predicted = 0;
  std::vector<double> residuals;  // ordered like EvalReport::class_ids
};

struct EvalReport {
  std::vector<int> class_ids;  // ascending original labels; index = dense id - 1
  std::vector<std::vector<long long>> confusion;
  std::map<int, double> per_class;  // keyed by original label
  double accuracy = 0.0;            // sample-weighted, primary
  double class_weighted = 0.0;
  int reduced_dim = 0;
  double explained_ratio = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::vector<PredictionRow> predictions;
  std::vector<std::pair<std::string, std::string>> config_echo;  // sorted key = value
};

namespace detail {

inline std::vector<int> dense_class_ids(const std::vector<SampleMeta>& meta,
                                        const Split& split) {
  std::set<int> train_classes;
  for (std::size_t i : split.train) train_classes.insert(meta[i].action_id);
  for (std::size_t i : split.test)
    require(train_classes.count(meta[i].action_id) > 0, ErrorCode::MissingClassInTrain,
            "test class " + std::to_string(meta[i].action_id) + " absent from training");
  return {train_classes.begin(), train_classes.end()};
}

inline int dense_label(const std::vector<int>& class_ids, int original) {
  const auto it = std::lower_bound(class_ids.begin(), class_ids.end(), original);
  require(it != class_ids.end() && *it == original, ErrorCode::LabelOutOfRange,
          "label " + std::to_string(original) + " not in training classes");
  return static_cast<int>(it - class_ids.begin()) + 1;
}

}  // namespace detail

/// MTM -> descriptor -> PCA(train) -> CRC over the protocol's split.
/// Feature extraction is parallel over sequences; the fit, projection, and
/// aggregation stages are serial so reports are deterministic.
inline EvalReport run_experiment(const std::vector<DepthSequence>& dataset,
                                 const Protocol& protocol, const PipelineConfig& config) {
  config.validate();
  const std::vector<SampleMeta> meta = dataset_meta(dataset);
  const Split split = make_split(meta, protocol);

  EvalReport report;
  report.class_ids = detail::dense_class_ids(meta, split);
  report.train_count = split.train.size();
  report.test_count = split.test.size();

  std::vector<std::size_t> used = split.train;
  used.insert(used.end(), split.test.begin(), split.test.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  std::vector<ActionVector> features(used.size());
  parallel_for(used.size(), config.workers, [&](std::size_t j) {
    const MtmOutput mtm = compute_mtm(dataset[used[j]], config.mtm);
    features[j] = build_action_vector(mtm, config.glac, config.prep, config.features);
  });

  std::vector<std::size_t> slot_of(meta.size(), 0);
  for (std::size_t j = 0; j < used.size(); ++j) slot_of[used[j]] = j;

  std::vector<ActionVector> train_vectors;
  train_vectors.reserve(split.train.size());
  for (std::size_t i : split.train) train_vectors.push_back(features[slot_of[i]]);

  const PcaModel pca = fit_pca(train_vectors, config.retention);
  report.reduced_dim = pca.k();
  report.explained_ratio = pca.explained_ratio;

  Eigen::MatrixXd dictionary(pca.k(), static_cast<Eigen::Index>(split.train.size()));
  std::vector<int> train_labels(split.train.size());
  for (std::size_t j = 0; j < split.train.size(); ++j) {
    dictionary.col(static_cast<Eigen::Index>(j)) = project_pca(pca, train_vectors[j].values);
    train_labels[j] = detail::dense_label(report.class_ids, meta[split.train[j]].action_id);
  }
  const CrcModel crc(dictionary, train_labels, config.mu);

  std::vector<PredictionRow> rows(split.test.size());
  parallel_for(split.test.size(), config.workers, [&](std::size_t j) {
    const std::size_t i = split.test[j];
    const Eigen::VectorXd query = project_pca(pca, features[slot_of[i]].values);
    const CrcDecision decision = classify(crc, query);
    rows[j] = {meta[i].sample_id, meta[i].action_id,
               report.class_ids[static_cast<std::size_t>(decision.predicted_class - 1)],
               decision.residuals};
  });
  report.predictions = std::move(rows);

  std::vector<int> truths;
  std::vector<int> preds;
  truths.reserve(report.predictions.size());
  preds.reserve(report.predictions.size());
  for (const auto& row : report.predictions) {
    truths.push_back(detail::dense_label(report.class_ids, row.actual));
    preds.push_back(detail::dense_label(report.class_ids, row.predicted));
  }
  const auto dense_confusion =
      confusion_matrix(truths, preds, static_cast<int>(report.class_ids.size()));
  report.confusion = dense_confusion;
  report.accuracy = average_accuracy(dense_confusion);
  report.class_weighted = class_weighted_accuracy(dense_confusion);
  for (const auto& [dense, acc] : per_class_accuracy(dense_confusion))
    report.per_class[report.class_ids[static_cast<std::size_t>(dense - 1)]] = acc;
  return report;
}

namespace detail {

inline std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string format_residual(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

inline std::string render_report_csv(const EvalReport& r) {
  std::string out = "metric,value\n";
  out += "average_accuracy," + detail::format_fraction(r.accuracy) + "\n";
  out += "class_weighted_accuracy," + detail::format_fraction(r.class_weighted) + "\n";
  out += "reduced_dim," + std::to_string(r.reduced_dim) + "\n";
  out += "explained_ratio," + detail::format_fraction(r.explained_ratio) + "\n";
  out += "train_count," + std::to_string(r.train_count) + "\n";
  out += "test_count," + std::to_string(r.test_count) + "\n";
  for (const auto& [cls, acc] : r.per_class)
    out += "class_" + std::to_string(cls) + "_accuracy," + detail::format_fraction(acc) + "\n";
  return out;
}

inline std::string render_confusion_csv(const EvalReport& r) {
  std::string out = "actual\\predicted";
  for (int c : r.class_ids) out += "," + std::to_string(c);
  out += "\n";
  for (std::size_t row = 0; row < r.confusion.size(); ++row) {
    out += std::to_string(r.class_ids[row]);
    for (long long v : r.confusion[row]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

inline std::string render_predictions_csv(const EvalReport& r) {
  std::string out = "seq_id,true_class,predicted_class";
  for (int c : r.class_ids) out += ",q_" + std::to_string(c);
  out += "\n";
  for (const auto& row : r.predictions) {
    out += row.sample_id + "," + std::to_string(row.actual) + "," + std::to_string(row.predicted);
    for (double q : row.residuals) out += "," + detail::format_residual(q);
    out += "\n";
  }
  return out;
}

inline std::string render_manifest(const EvalReport& r) {
  std::string out;
  for (const auto& [key, value] : r.config_echo) out += key + " = " + value + "\n";
  return out;
}

/// report.csv, confusion.csv, predictions.csv, manifest.txt under out_dir.
inline void write_reports(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto dump = [&](const char* name, const std::string& body) {
    write_file_bytes(out_dir / name, {reinterpret_cast<const std::uint8_t*>(body.data()),
                                      body.size()});
  };
  dump("report.csv", render_report_csv(report));
  dump("confusion.csv", render_confusion_csv(report));
  dump("predictions.csv", render_predictions_csv(report));
  dump("manifest.txt", render_manifest(report));
}

/// One grid cell of the hyperparameter sweep.
struct TuneCell {
  int bins = 8;
  int delta_r = 1;
  int spatial_rows = 1;
  int spatial_cols = 2;
  double mu = 0.0001;
  double cv_accuracy = 0.0;
};

struct TuneResult {
  std::vector<TuneCell> cells;  // grid order
  std::size_t best = 0;         // ties keep the earliest cell
};

/// 5-fold cross-validated grid search over (bins, delta_r, grid, mu) on the
/// protocol's training split. Folds are assigned round-robin per class in
/// deterministic sample order; a validation sample whose class is missing
/// from the fold's training part counts as a miss.
inline TuneResult tune_grid_search(const std::vector<DepthSequence>& dataset,
                                   const Protocol& protocol, const PipelineConfig& base,
                                   const std::vector<int>& bins_grid,
                                   const std::vector<int>& delta_r_grid,
                                   const std::vector<std::pair<int, int>>& spatial_grid,
                                   const std::vector<double>& mu_grid, int folds = 5) {
  base.validate();
  require(!bins_grid.empty() && !delta_r_grid.empty() && !spatial_grid.empty() &&
              !mu_grid.empty(),
          ErrorCode::InvalidArgument, "empty tuning grid");
  require(folds >= 2, ErrorCode::InvalidArgument, "need at least 2 folds");

  const std::vector<SampleMeta> meta = dataset_meta(dataset);
  const Split split = make_split(meta, protocol);
  const std::vector<std::size_t>& pool = split.train;
  require(pool.size() >= static_cast<std::size_t>(folds), ErrorCode::InvalidArgument,
          "fewer training samples than folds");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i : pool) by_class[meta[i].action_id].push_back(i);
  std::map<std::size_t, int> fold_of;
  for (auto& [cls, members] : by_class) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(meta[a].subject_id, meta[a].trial_id, meta[a].sample_id) <
             std::tie(meta[b].subject_id, meta[b].trial_id, meta[b].sample_id);
    });
    for (std::size_t j = 0; j < members.size(); ++j)
      fold_of[members[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
  }

  std::vector<std::array<Grid<float>, 6>> templates(pool.size());
  parallel_for(pool.size(), base.workers, [&](std::size_t j) {
    templates[j] = prepare_all_templates(compute_mtm(dataset[pool[j]], base.mtm), base.prep);
  });

  TuneResult result;
  for (int bins : bins_grid) {
    for (int dr : delta_r_grid) {
      for (const auto& [srows, scols] : spatial_grid) {
        GlacConfig glac = base.glac;
        glac.bins = bins;
        glac.delta_r = dr;
        glac.spatial_rows = srows;
        glac.spatial_cols = scols;
        glac.validate();

        std::vector<ActionVector> vectors(pool.size());
        parallel_for(pool.size(), base.workers, [&](std::size_t j) {
          vectors[j] = action_vector_from_templates(templates[j], glac, base.features);
        });

        for (double mu : mu_grid) {
          long long correct = 0;
          long long total = 0;
          for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> fit_slots;
            std::vector<std::size_t> val_slots;
            for (std::size_t j = 0; j < pool.size(); ++j)
              (fold_of[pool[j]] == f ? val_slots : fit_slots).push_back(j);
            if (val_slots.empty()) continue;

            std::set<int> fit_classes;
            for (std::size_t j : fit_slots) fit_classes.insert(meta[pool[j]].action_id);
            std::vector<int> class_ids(fit_classes.begin(), fit_classes.end());

            std::vector<ActionVector> fit_vectors;
            fit_vectors.reserve(fit_slots.size());
            for (std::size_t j : fit_slots) fit_vectors.push_back(vectors[j]);
            const PcaModel pca = fit_pca(fit_vectors, base.retention);

            Eigen::MatrixXd dict(pca.k(), static_cast<Eigen::Index>(fit_slots.size()));
            std::vector<int> labels(fit_slots.size());
            for (std::size_t j = 0; j < fit_slots.size(); ++j) {
              dict.col(static_cast<Eigen::Index>(j)) =
                  project_pca(pca, fit_vectors[j].values);
              labels[j] = detail::dense_label(class_ids, meta[pool[fit_slots[j]]].action_id);
            }
            const CrcModel crc(dict, labels, mu);

            std::vector<int> verdicts(val_slots.size(), 0);
            parallel_for(val_slots.size(), base.workers, [&](std::size_t v) {
              const std::size_t j = val_slots[v];
              const int actual = meta[pool[j]].action_id;
              if (!std::binary_search(class_ids.begin(), class_ids.end(), actual)) return;
              const CrcDecision d = classify(crc, project_pca(pca, vectors[j].values));
              if (class_ids[static_cast<std::size_t>(d.predicted_class - 1)] == actual)
                verdicts[v] = 1;
            });
            for (int v : verdicts) correct += v;
            total += static_cast<long long>(val_slots.size());
          }
          TuneCell cell{bins, dr, srows, scols, mu,
                        total > 0 ? static_cast<double>(correct) / total : 0.0};
          result.cells.push_back(cell);
          if (cell.cv_accuracy > result.cells[result.best].cv_accuracy)
            result.best = result.cells.size() - 1;
        }
      }
    }
  }
  return result;
}

inline std::string render_tune_csv(const TuneResult& r) {
  std::string out = "bins,delta_r,spatial_rows,spatial_cols,mu,cv_accuracy,selected\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const TuneCell& c = r.cells[i];
    out += std::to_string(c.bins) + "," + std::to_string(c.delta_r) + "," +
           std::to_string(c.spatial_rows) + "," + std::to_string(c.spatial_cols) + "," +
           detail::format_residual(c.mu) + "," + detail::format_fraction(c.cv_accuracy) + "," +
           (i == r.best ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace deptrail
