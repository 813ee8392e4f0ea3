#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/glac.hpp"
#include "deptrail/mtm.hpp"

namespace deptrail {

/// Which template family feeds the action vector. Fused keeps the full
/// six-segment layout; the single-family variants are the ablation baselines.
enum class FeatureSet { Fused, MhiOnly, ShiOnly };

inline const char* to_string(FeatureSet f) {
  switch (f) {
    case FeatureSet::Fused: return "fused";
    case FeatureSet::MhiOnly: return "gmhi";
    case FeatureSet::ShiOnly: return "gshi";
  }
  return "?";
}

/// Fused descriptor of one action sample. Segment order is fixed:
/// [GMHI_xOy, GMHI_yOz, GMHI_xOz, GSHI_xOy, GSHI_yOz, GSHI_xOz].
struct ActionVector {
  std::vector<double> values;
  int action_id = 0;
  int subject_id = 0;
  int trial_id = 0;
  std::string sample_id;
};

/// All six conditioned templates in segment order. Caching these lets a
/// hyperparameter sweep rerun only the descriptor stage.
inline std::array<Grid<float>, 6> prepare_all_templates(const MtmOutput& mtm,
                                                        const TemplatePrep& prep = {}) {
  std::array<Grid<float>, 6> out;
  std::size_t i = 0;
  for (TemplateKind kind : {TemplateKind::MHI, TemplateKind::SHI})
    for (Plane plane : {Plane::xOy, Plane::yOz, Plane::xOz})
      out[i++] = prepare_template(mtm.get(plane, kind), prep);
  return out;
}

/// Run GLAC on each selected template, concatenate in the fixed segment
/// order, and l2-normalize the result (zero vectors pass through
/// unnormalized).
inline ActionVector action_vector_from_templates(const std::array<Grid<float>, 6>& templates,
                                                 const GlacConfig& cfg,
                                                 FeatureSet features = FeatureSet::Fused) {
  ActionVector out;

  std::vector<std::size_t> segments;
  if (features != FeatureSet::ShiOnly) segments.insert(segments.end(), {0, 1, 2});
  if (features != FeatureSet::MhiOnly) segments.insert(segments.end(), {3, 4, 5});

  out.values.reserve(segments.size() * cfg.descriptor_length());
  for (std::size_t s : segments) {
    const auto segment = glac_descriptor(templates[s], cfg);
    out.values.insert(out.values.end(), segment.begin(), segment.end());
  }

  const double norm = std::sqrt(std::inner_product(out.values.begin(), out.values.end(),
                                                   out.values.begin(), 0.0));
  if (norm > 0.0)
    for (auto& v : out.values) v /= norm;
  return out;
}

inline ActionVector build_action_vector(const MtmOutput& mtm, const GlacConfig& cfg,
                                        const TemplatePrep& prep = {},
                                        FeatureSet features = FeatureSet::Fused) {
  ActionVector out = action_vector_from_templates(prepare_all_templates(mtm, prep), cfg, features);
  out.action_id = mtm.action_id;
  out.subject_id = mtm.subject_id;
  out.trial_id = mtm.trial_id;
  out.sample_id = mtm.sample_id;
  return out;
}

/// Mean + orthonormal basis retaining the smallest component count whose
/// cumulative variance ratio reaches the retention target.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // dim x k, columns ordered by decreasing variance
  double explained_ratio = 0.0;

  int dim() const { return static_cast<int>(mean.size()); }
  int k() const { return static_cast<int>(basis.cols()); }
};

/// Fit on training rows (one sample per row). Uses the Gram-matrix route when
/// samples are fewer than dimensions, the covariance route otherwise.
inline PcaModel fit_pca(const Eigen::MatrixXd& train_rows, double retention = 0.99) {
  const Eigen::Index n = train_rows.rows();
  const Eigen::Index dim = train_rows.cols();
  require(n >= 2, ErrorCode::InvalidArgument, "PCA needs at least 2 training vectors");
  require(retention > 0.0 && retention <= 1.0, ErrorCode::InvalidArgument,
          "retention must be in (0, 1]");

  PcaModel model;
  model.mean = train_rows.colwise().mean();
  const Eigen::MatrixXd centered = train_rows.rowwise() - model.mean.transpose();

  Eigen::VectorXd eigenvalues;   // descending covariance eigenvalues
  Eigen::MatrixXd components;    // dim x r, unit columns
  if (n < dim) {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    require(solver.info() == Eigen::Success, ErrorCode::DegenerateData,
            "eigendecomposition failed");
    eigenvalues = solver.eigenvalues().reverse() / static_cast<double>(n - 1);
    components.resize(dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lambda = solver.eigenvalues()(n - 1 - i);
      if (lambda > 0.0)
        components.col(i) = centered.transpose() * solver.eigenvectors().col(n - 1 - i) /
                            std::sqrt(lambda);
      else
        components.col(i).setZero();
    }
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    require(solver.info() == Eigen::Success, ErrorCode::DegenerateData,
            "eigendecomposition failed");
    eigenvalues = solver.eigenvalues().reverse();
    components = solver.eigenvectors().rowwise().reverse();
  }

  eigenvalues = eigenvalues.cwiseMax(0.0);
  const double total = eigenvalues.sum();
  require(total > 0.0, ErrorCode::DegenerateData, "training vectors have zero variance");

  // Numerical rank cutoff keeps components for near-zero eigenvalues out of
  // the basis even at retention 1.0.
  const double rank_floor = eigenvalues(0) * 1e-12;
  Eigen::Index rank = 0;
  while (rank < eigenvalues.size() && eigenvalues(rank) > rank_floor) ++rank;

  double cumulative = 0.0;
  Eigen::Index k = rank;
  for (Eigen::Index i = 0; i < rank; ++i) {
    cumulative += eigenvalues(i);
    if (cumulative / total >= retention) {
      k = i + 1;
      break;
    }
  }

  model.basis = components.leftCols(k);
  model.explained_ratio = eigenvalues.head(k).sum() / total;
  return model;
}

inline PcaModel fit_pca(const std::vector<ActionVector>& train, double retention = 0.99) {
  require(train.size() >= 2, ErrorCode::InvalidArgument,
          "PCA needs at least 2 training vectors");
  const Eigen::Index dim = static_cast<Eigen::Index>(train.front().values.size());
  Eigen::MatrixXd rows(train.size(), dim);
  for (std::size_t i = 0; i < train.size(); ++i) {
    require(static_cast<Eigen::Index>(train[i].values.size()) == dim,
            ErrorCode::LengthMismatch, "action vectors must share one length");
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(train[i].values.data(), dim);
  }
  return fit_pca(rows, retention);
}

inline Eigen::VectorXd project_pca(const PcaModel& model, const Eigen::VectorXd& v) {
  require(v.size() == model.mean.size(), ErrorCode::LengthMismatch,
          "vector length does not match the model");
  return model.basis.transpose() * (v - model.mean);
}

inline Eigen::VectorXd project_pca(const PcaModel& model, const std::vector<double>& v) {
  return project_pca(model,
                     Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                         v.data(), static_cast<Eigen::Index>(v.size()))));
}

// PCAM model file, all little-endian: magic "PCAM", dim u32, k u32,
// explained_ratio f64, mean (dim f64), basis (dim*k f64, column-major).
inline std::vector<std::uint8_t> write_pca(const PcaModel& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'P', 'C', 'A', 'M'});
  detail::put_u32(out, static_cast<std::uint32_t>(model.dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(model.k()));
  const auto put_f64 = [&out](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i)
      out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  };
  put_f64(model.explained_ratio);
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) put_f64(model.mean(i));
  for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
    for (Eigen::Index r = 0; r < model.basis.rows(); ++r) put_f64(model.basis(r, c));
  return out;
}

inline PcaModel read_pca(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 12, ErrorCode::TruncatedStream, "stream shorter than header");
  require(bytes[0] == 'P' && bytes[1] == 'C' && bytes[2] == 'A' && bytes[3] == 'M',
          ErrorCode::BadMagic, "missing PCAM magic");
  detail::ByteReader in(bytes.subspan(4));
  const std::uint32_t dim = in.u32();
  const std::uint32_t k = in.u32();
  const std::size_t doubles = 1 + static_cast<std::size_t>(dim) * (1 + k);
  require(in.remaining() == 8 * doubles, ErrorCode::TruncatedStream,
          "payload size does not match dim/k");
  const auto get_f64 = [&in]() {
    std::uint64_t bits = in.u32();
    bits |= static_cast<std::uint64_t>(in.u32()) << 32;
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  };
  PcaModel model;
  model.explained_ratio = get_f64();
  model.mean.resize(dim);
  for (std::uint32_t i = 0; i < dim; ++i) model.mean(i) = get_f64();
  model.basis.resize(dim, k);
  for (std::uint32_t c = 0; c < k; ++c)
    for (std::uint32_t r = 0; r < dim; ++r) model.basis(r, c) = get_f64();
  return model;
}

inline void save_pca_file(const std::filesystem::path& path, const PcaModel& model) {
  write_file_bytes(path, write_pca(model));
}

inline PcaModel load_pca_file(const std::filesystem::path& path) {
  return read_pca(read_file_bytes(path));
}

}  // namespace deptrail
