#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "krlab/data.hpp"

using namespace krlab::data;

namespace {

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string write_temp(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    return path;
}

// six 2x2 "images" with pixel value = 10*i + pixel index, labels 0..5
struct Fixture {
    std::string images, labels;
    Fixture(std::uint32_t img_magic = 0x00000803, std::uint32_t lab_magic = 0x00000801,
            std::uint32_t n_images = 6, std::uint32_t n_labels = 6, int drop_bytes = 0) {
        static int serial = 0;
        std::string tag = std::to_string(serial++);
        std::vector<std::uint8_t> img;
        push_be32(img, img_magic);
        push_be32(img, n_images);
        push_be32(img, 2);
        push_be32(img, 2);
        for (std::uint32_t i = 0; i < 6; ++i)
            for (std::uint32_t px = 0; px < 4; ++px)
                img.push_back(static_cast<std::uint8_t>(10 * i + px));
        for (int i = 0; i < drop_bytes; ++i) img.pop_back();
        images = write_temp("krlab_test_images_" + tag + ".idx", img);

        std::vector<std::uint8_t> lab;
        push_be32(lab, lab_magic);
        push_be32(lab, n_labels);
        for (std::uint32_t i = 0; i < 6; ++i) lab.push_back(static_cast<std::uint8_t>(i));
        labels = write_temp("krlab_test_labels_" + tag + ".idx", lab);
    }
};

}  // namespace

TEST_SUITE("data") {

TEST_CASE("idx files round-trip through the loader") {
    Fixture fx;
    ClassificationDataset ds = load_idx(fx.images, fx.labels);
    CHECK(ds.n() == 6);
    CHECK(ds.inputs.cols() == 4);
    CHECK(ds.K == 6);
    CHECK(ds.labels == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(ds.inputs(0, 0) == doctest::Approx(0.0));
    CHECK(ds.inputs(0, 3) == doctest::Approx(3.0 / 255.0));
    CHECK(ds.inputs(5, 0) == doctest::Approx(50.0 / 255.0));
    CHECK_FALSE(ds.provenance.empty());
}

TEST_CASE("malformed idx input is rejected") {
    CHECK_THROWS_AS(load_idx(Fixture(0x00000802).images, Fixture().labels), BadMagic);
    {
        Fixture fx(0x00000803, 0x00000805);
        CHECK_THROWS_AS(load_idx(fx.images, fx.labels), BadMagic);
    }
    {
        Fixture fx(0x00000803, 0x00000801, 6, 5);  // label count disagrees
        CHECK_THROWS_AS(load_idx(fx.images, fx.labels), CountMismatch);
    }
    {
        Fixture fx(0x00000803, 0x00000801, 6, 6, 3);  // payload short by 3 bytes
        CHECK_THROWS_AS(load_idx(fx.images, fx.labels), TruncatedFile);
    }
    CHECK_THROWS(load_idx("/nonexistent/path.idx", Fixture().labels));
}

TEST_CASE("binarization maps, drops, and rejects unknown labels") {
    Fixture fx;
    ClassificationDataset ds = load_idx(fx.images, fx.labels);

    ClassificationDataset eo = binarize(ds, even_odd_map());
    CHECK(eo.n() == 6);
    CHECK(eo.K == 2);
    CHECK(eo.labels == std::vector<int>{0, 1, 0, 1, 0, 1});

    // drop odd labels entirely
    ClassificationDataset dropped = binarize(ds, {0, -1, 0, -1, 0, -1});
    CHECK(dropped.n() == 3);
    CHECK(dropped.labels == std::vector<int>{0, 0, 0});
    CHECK(dropped.inputs(1, 0) == doctest::Approx(20.0 / 255.0));  // original row 2

    CHECK_THROWS_AS(binarize(ds, std::vector<int>(6, -1)), EmptyResult);

    ClassificationDataset weird = ds;
    weird.labels[3] = 17;  // outside the 10-entry even/odd map
    CHECK_THROWS_AS(binarize(weird, even_odd_map()), std::invalid_argument);
}

TEST_CASE("subsampling is deterministic and duplicate-free") {
    Fixture fx;
    ClassificationDataset ds = load_idx(fx.images, fx.labels);
    ClassificationDataset a = subsample(ds, 3, 5);
    ClassificationDataset b = subsample(ds, 3, 5);
    CHECK(a.labels == b.labels);
    CHECK(a.n() == 3);
    // labels are unique in the fixture, so uniqueness here means distinct rows
    std::vector<int> sorted = a.labels;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());
    // rows track their labels
    for (int i = 0; i < 3; ++i)
        CHECK(a.inputs(i, 0) == doctest::Approx(10.0 * a.labels[i] / 255.0));
}

TEST_CASE("label corruption flips an exact fraction and never redraws the truth") {
    Fixture fx;
    ClassificationDataset ds = load_idx(fx.images, fx.labels);
    ClassificationDataset big;
    big.K = 2;
    big.inputs = Eigen::MatrixXd::Zero(100, 1);
    big.labels.assign(100, 1);

    NoiseSpec spec;
    spec.kind = NoiseSpec::Kind::LabelFlip;
    spec.p = 0.5;
    auto [noisy, mask] = inject_noise(big, spec, 11);

    std::size_t flipped = 0, mask_on = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        if (noisy.labels[i] != big.labels[i]) ++flipped;
        if (mask[i]) ++mask_on;
        if (mask[i]) CHECK(noisy.labels[i] != big.labels[i]);  // exclusion rule
    }
    CHECK(flipped == 50);
    CHECK(mask_on == 50);
    for (int l : big.labels) CHECK(l == 1);  // source untouched

    // multiclass: replacements stay in range and off the original
    spec.p = 0.3;
    auto [noisy6, mask6] = inject_noise(ds, spec, 3);
    std::size_t on = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(noisy6.labels[i] >= 0);
        CHECK(noisy6.labels[i] < 6);
        if (mask6[i]) {
            ++on;
            CHECK(noisy6.labels[i] != ds.labels[i]);
        } else {
            CHECK(noisy6.labels[i] == ds.labels[i]);
        }
    }
    CHECK(on == 2);  // round(0.3 * 6)
}

TEST_CASE("additive target noise marks every index") {
    Eigen::VectorXd clean = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    NoiseSpec spec;
    spec.kind = NoiseSpec::Kind::GaussianAdditive;
    spec.sigma2 = 0.5;
    auto [noisy, mask] = inject_noise(clean, spec, 4);
    CHECK(noisy.size() == 10);
    CHECK((noisy - clean).norm() > 0.0);
    for (auto m : mask) CHECK(m == 1);

    spec.sigma2 = 0.0;
    auto [same, off] = inject_noise(clean, spec, 4);
    CHECK((same - clean).norm() == 0.0);
    for (auto m : off) CHECK(m == 0);
}

TEST_CASE("target encodings round-trip") {
    std::vector<int> labels = {0, 1, 1, 0};
    Eigen::VectorXd pm = encode_pm1(labels);
    CHECK(pm(0) == -1.0);
    CHECK(pm(1) == 1.0);
    CHECK(decode_pm1(pm) == labels);

    Eigen::VectorXd scores(4);
    scores << -0.2, 0.3, 0.0, -5.0;
    CHECK(decode_pm1(scores) == std::vector<int>{0, 1, 1, 0});  // 0 decodes as class 1 (>= 0)

    Eigen::MatrixXd onehot = encode_onehot({2, 0, 1}, 3);
    CHECK(onehot.rows() == 3);
    CHECK(onehot.cols() == 3);
    CHECK(onehot(0, 2) == 1.0);
    CHECK(onehot(1, 0) == 1.0);
    CHECK(decode_onehot(onehot) == std::vector<int>{2, 0, 1});

    CHECK(classification_error({0, 1, 1}, {0, 1, 0}) == doctest::Approx(1.0 / 3.0));
}

}  // TEST_SUITE
