#include "krlab/data.hpp"

#include <fstream>
#include <numeric>

#include "krlab/rng.hpp"

namespace krlab::data {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw TruncatedFile("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    if (off + 4 > b.size()) throw TruncatedFile("IDX header truncated");
    return (static_cast<std::uint32_t>(b[off]) << 24) | (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) | static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace

ClassificationDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    auto img = read_file(images_path);
    auto lab = read_file(labels_path);

    if (be32(img, 0) != 0x00000803u)
        throw BadMagic("bad image magic in " + images_path);
    if (be32(lab, 0) != 0x00000801u)
        throw BadMagic("bad label magic in " + labels_path);

    std::uint32_t n_img = be32(img, 4);
    std::uint32_t rows = be32(img, 8);
    std::uint32_t cols = be32(img, 12);
    std::uint32_t n_lab = be32(lab, 4);

    if (n_img != n_lab)
        throw CountMismatch("image count " + std::to_string(n_img) + " != label count " +
                            std::to_string(n_lab));
    std::size_t dim = static_cast<std::size_t>(rows) * cols;
    if (img.size() < 16 + static_cast<std::size_t>(n_img) * dim)
        throw TruncatedFile("image payload truncated in " + images_path);
    if (lab.size() < 8 + n_lab)
        throw TruncatedFile("label payload truncated in " + labels_path);

    ClassificationDataset ds;
    ds.inputs.resize(n_img, static_cast<Eigen::Index>(dim));
    ds.labels.resize(n_lab);
    int kmax = 0;
    for (std::uint32_t i = 0; i < n_img; ++i) {
        const std::uint8_t* px = img.data() + 16 + static_cast<std::size_t>(i) * dim;
        for (std::size_t j = 0; j < dim; ++j)
            ds.inputs(i, static_cast<Eigen::Index>(j)) = static_cast<double>(px[j]) / 255.0;
        ds.labels[i] = lab[8 + i];
        kmax = std::max(kmax, ds.labels[i]);
    }
    ds.K = kmax + 1;
    ds.provenance = images_path + " + " + labels_path;
    return ds;
}

ClassificationDataset binarize(const ClassificationDataset& ds, const std::vector<int>& class_map) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        int lab = ds.labels[static_cast<std::size_t>(i)];
        if (lab < 0 || static_cast<std::size_t>(lab) >= class_map.size())
            throw std::invalid_argument("observed label " + std::to_string(lab) +
                                        " has no class-map entry");
        int mapped = class_map[static_cast<std::size_t>(lab)];
        if (mapped != 0 && mapped != 1 && mapped != -1)
            throw std::invalid_argument("class map values must be 0, 1 or -1 (drop)");
        if (mapped != -1) keep.push_back(i);
    }
    if (keep.empty()) throw EmptyResult("binarize dropped every sample");

    ClassificationDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(keep.size()), ds.inputs.cols());
    out.labels.resize(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.inputs.row(static_cast<Eigen::Index>(r)) = ds.inputs.row(keep[r]);
        out.labels[r] = class_map[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(keep[r])])];
    }
    out.K = 2;
    out.provenance = ds.provenance + " [binarized]";
    return out;
}

std::vector<int> even_odd_map() { return {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}; }

ClassificationDataset subsample(const ClassificationDataset& ds, std::size_t m, std::uint64_t seed) {
    std::size_t n = static_cast<std::size_t>(ds.n());
    if (m > n) throw std::invalid_argument("subsample larger than dataset");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng::Stream st(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(st.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    ClassificationDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(m), ds.inputs.cols());
    out.labels.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        out.inputs.row(static_cast<Eigen::Index>(r)) = ds.inputs.row(static_cast<Eigen::Index>(idx[r]));
        out.labels[r] = ds.labels[idx[r]];
    }
    out.K = ds.K;
    out.provenance = ds.provenance + " [subsample " + std::to_string(m) + "]";
    return out;
}

std::pair<ClassificationDataset, std::vector<std::uint8_t>> inject_noise(
    const ClassificationDataset& ds, const NoiseSpec& spec, std::uint64_t seed) {
    if (spec.kind != NoiseSpec::Kind::LabelFlip)
        throw std::invalid_argument("label datasets take LabelFlip noise");
    if (spec.p < 0.0 || spec.p >= 1.0) throw std::invalid_argument("flip fraction must lie in [0,1)");
    if (ds.K < 2) throw std::invalid_argument("need at least two classes to corrupt labels");

    std::size_t n = static_cast<std::size_t>(ds.n());
    ClassificationDataset out = ds;
    std::vector<std::uint8_t> mask(n, 0);

    std::size_t ncorrupt = static_cast<std::size_t>(std::llround(spec.p * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng::Stream st(seed);
    for (std::size_t i = 0; i < ncorrupt; ++i) {
        std::size_t j = i + static_cast<std::size_t>(st.below(n - i));
        std::swap(idx[i], idx[j]);
        std::size_t pick = idx[i];
        // resample uniformly among the K-1 labels excluding the truth
        int offset = 1 + static_cast<int>(st.below(static_cast<std::uint64_t>(ds.K - 1)));
        out.labels[pick] = (ds.labels[pick] + offset) % ds.K;
        mask[pick] = 1;
    }
    out.provenance = ds.provenance + " [label noise p=" + std::to_string(spec.p) + "]";
    return {std::move(out), std::move(mask)};
}

std::pair<Eigen::VectorXd, std::vector<std::uint8_t>> inject_noise(const Eigen::VectorXd& targets,
                                                                   const NoiseSpec& spec,
                                                                   std::uint64_t seed) {
    if (spec.kind != NoiseSpec::Kind::GaussianAdditive)
        throw std::invalid_argument("regression targets take GaussianAdditive noise");
    if (spec.sigma2 < 0.0) throw std::invalid_argument("noise variance must be nonnegative");

    Eigen::VectorXd out = targets;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(targets.size()),
                                   spec.sigma2 > 0.0 ? 1 : 0);
    if (spec.sigma2 > 0.0) {
        rng::Stream st(seed);
        double sig = std::sqrt(spec.sigma2);
        for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sig * st.gauss();
    }
    return {std::move(out), std::move(mask)};
}

Eigen::VectorXd encode_pm1(const std::vector<int>& labels) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("pm1 encoding needs binary labels");
        y(static_cast<Eigen::Index>(i)) = labels[i] == 1 ? 1.0 : -1.0;
    }
    return y;
}

Eigen::MatrixXd encode_onehot(const std::vector<int>& labels, int K) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), K);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= K) throw std::invalid_argument("label out of range");
        Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return Y;
}

std::vector<int> decode_pm1(const Eigen::VectorXd& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        out[static_cast<std::size_t>(i)] = scores(i) >= 0.0 ? 1 : 0;
    return out;
}

std::vector<int> decode_onehot(const Eigen::MatrixXd& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index arg = 0;
        scores.row(i).maxCoeff(&arg);
        out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return out;
}

double classification_error(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (predicted.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] != truth[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

}  // namespace krlab::data
