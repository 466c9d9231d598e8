#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Dataset ingestion for the real-data noise-profile experiments: IDX
// (MNIST-family) container parsing, class-map binarization, subsampling, and
// label corruption.  Corruption resamples uniformly among the *other* class
// labels — the ground-truth label is never redrawn onto itself — and flips an
// exact round(p*n) fraction rather than i.i.d. coin flips.

namespace krlab::data {

struct BadMagic : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CountMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncatedFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyResult : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassificationDataset {
    Eigen::MatrixXd inputs;   // n x dim, pixel values scaled to [0,1]
    std::vector<int> labels;  // in [0, K)
    int K = 0;
    std::string provenance;

    Eigen::Index n() const { return inputs.rows(); }
};

struct NoiseSpec {
    enum class Kind { GaussianAdditive, LabelFlip };
    Kind kind = Kind::LabelFlip;
    double sigma2 = 0.0;  // GaussianAdditive
    double p = 0.0;       // LabelFlip, in [0,1)
};

// IDX magic 0x00000803 for image files, 0x00000801 for label files,
// big-endian headers throughout.
ClassificationDataset load_idx(const std::string& images_path, const std::string& labels_path);

// class_map[old_label] in {0, 1, -1}; -1 drops the sample.  Labels outside
// the map are an error (no silent drops).
ClassificationDataset binarize(const ClassificationDataset& ds, const std::vector<int>& class_map);

// MNIST even-vs-odd digits: even -> 0, odd -> 1.
std::vector<int> even_odd_map();

// uniform subsample without replacement, seed-deterministic
ClassificationDataset subsample(const ClassificationDataset& ds, std::size_t m, std::uint64_t seed);

// exact-fraction label corruption; returns the noisy copy plus a mask of the
// corrupted indices (the input is never modified)
std::pair<ClassificationDataset, std::vector<std::uint8_t>> inject_noise(
    const ClassificationDataset& ds, const NoiseSpec& spec, std::uint64_t seed);

// additive Gaussian noise on regression targets; the mask marks every index
// when sigma2 > 0
std::pair<Eigen::VectorXd, std::vector<std::uint8_t>> inject_noise(const Eigen::VectorXd& targets,
                                                                   const NoiseSpec& spec,
                                                                   std::uint64_t seed);

// +/-1 target encoding for binary classification trained by least squares,
// one-hot for multiclass; argmax (sign) decoding back to labels
Eigen::VectorXd encode_pm1(const std::vector<int>& labels);
Eigen::MatrixXd encode_onehot(const std::vector<int>& labels, int K);
std::vector<int> decode_pm1(const Eigen::VectorXd& scores);
std::vector<int> decode_onehot(const Eigen::MatrixXd& scores);

double classification_error(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace krlab::data
