#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "krlab/kr.hpp"

using namespace krlab::kr;

TEST_SUITE("kr") {

TEST_CASE("sphere samples live on the sphere and are seed-deterministic") {
    Eigen::MatrixXd X = sample_sphere(4, 200, 7);
    CHECK(X.rows() == 200);
    CHECK(X.cols() == 5);  // S^4 embeds in R^5
    for (int i = 0; i < X.rows(); ++i)
        CHECK(X.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::MatrixXd Y = sample_sphere(4, 200, 7);
    CHECK((X - Y).norm() == 0.0);
    Eigen::MatrixXd Z = sample_sphere(4, 200, 8);
    CHECK((X - Z).norm() > 0.0);
}

TEST_CASE("kernel matrices have unit diagonal and the right off-diagonals") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 2.0;

    Eigen::MatrixXd G = kernel_matrix({KernelKind::Gaussian, 1.0}, X);
    CHECK(G(0, 0) == 1.0);
    CHECK(G(1, 1) == 1.0);
    CHECK(G(0, 1) == doctest::Approx(std::exp(-4.0)));
    CHECK(G(0, 1) == G(1, 0));

    Eigen::MatrixXd L = kernel_matrix({KernelKind::Laplace, 1.0}, X);
    CHECK(L(0, 1) == doctest::Approx(std::exp(-2.0)));

    // bandwidth scales the exponent
    Eigen::MatrixXd Gw = kernel_matrix({KernelKind::Gaussian, 2.0}, X);
    CHECK(Gw(0, 1) == doctest::Approx(std::exp(-1.0)));
    Eigen::MatrixXd Lw = kernel_matrix({KernelKind::Laplace, 2.0}, X);
    CHECK(Lw(0, 1) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("cross kernel agrees with the square kernel") {
    Eigen::MatrixXd X = sample_sphere(2, 10, 3);
    Eigen::MatrixXd G = kernel_matrix({KernelKind::Laplace, 1.0}, X);
    Eigen::MatrixXd C = cross_kernel({KernelKind::Laplace, 1.0}, X, X);
    CHECK((G - C).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ridge solve matches a direct inverse") {
    Eigen::MatrixXd X = sample_sphere(3, 12, 11);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = std::sin(static_cast<double>(i));
    double delta = 0.2;

    KRFit fit = kr_fit({KernelKind::Gaussian, 1.0}, X, y, delta);
    Eigen::MatrixXd K = kernel_matrix({KernelKind::Gaussian, 1.0}, X);
    K.diagonal().array() += delta;
    Eigen::VectorXd direct = K.inverse() * y;
    CHECK((fit.coeffs - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.condition > 0.0);
    CHECK_FALSE(fit.ill_conditioned);
}

TEST_CASE("ridgeless fit interpolates the training data") {
    Eigen::MatrixXd X = sample_sphere(3, 50, 5);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y(i) = std::cos(static_cast<double>(i));
    KRFit fit = kr_fit({KernelKind::Laplace, 1.0}, X, y, 0.0);
    Eigen::VectorXd at_train = kr_predict({KernelKind::Laplace, 1.0}, X, fit, X);
    CHECK((at_train - y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("coincident ridgeless points are a singular system") {
    Eigen::MatrixXd X = sample_sphere(3, 8, 9);
    X.row(3) = X.row(6);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
    CHECK_THROWS_AS(kr_fit({KernelKind::Gaussian, 1.0}, X, y, 0.0), SingularMatrix);
    // a ridge restores solvability
    CHECK_NOTHROW(kr_fit({KernelKind::Gaussian, 1.0}, X, y, 0.5));
}

TEST_CASE("near-coincident points trip the condition diagnostic") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1e-7;
    Eigen::VectorXd y(2);
    y << 1.0, -1.0;
    KRFit fit = kr_fit({KernelKind::Gaussian, 1.0}, X, y, 0.0);
    CHECK(fit.condition > 1e12);
    CHECK(fit.ill_conditioned);
}

TEST_CASE("singular-at-roundoff ridgeless solves are best-effort and flagged") {
    // A smooth kernel with a few hundred interpolation points: the Gram
    // spectrum reaches machine noise, so the SPD factorization may fail.
    // Contract: the fit is flagged, the coefficients come back finite, and
    // prediction still works (the values may legitimately be enormous).
    Eigen::MatrixXd X = sample_sphere(2, 320, 99);
    Eigen::VectorXd y(320);
    for (int i = 0; i < 320; ++i) y(i) = std::sin(0.7 * static_cast<double>(i));
    KRFit fit = kr_fit({KernelKind::Gaussian, 1.0}, X, y, 0.0);
    CHECK(fit.ill_conditioned);
    CHECK(fit.condition > 1e12);
    CHECK(fit.coeffs.allFinite());
    Eigen::VectorXd pred = kr_predict({KernelKind::Gaussian, 1.0}, X, fit, sample_sphere(2, 10, 1));
    CHECK(pred.allFinite());
}

TEST_CASE("prediction and mse helpers") {
    Eigen::MatrixXd X(2, 1), Q(1, 1);
    X << 0.0, 1.0;
    Q << 0.5;
    Eigen::VectorXd y(2);
    y << 1.0, 3.0;
    KRFit fit = kr_fit({KernelKind::Gaussian, 1.0}, X, y, 0.1);
    Eigen::VectorXd pred = kr_predict({KernelKind::Gaussian, 1.0}, X, fit, Q);
    double k = std::exp(-0.25);
    CHECK(pred(0) == doctest::Approx(k * fit.coeffs(0) + k * fit.coeffs(1)));

    Eigen::VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b << 0.0, 0.0;
    CHECK(test_mse(a, b) == doctest::Approx(2.5));
}

TEST_CASE("kernel names") {
    CHECK(kernel_name({KernelKind::Gaussian, 1.0}) == "gaussian");
    CHECK(kernel_name({KernelKind::Laplace, 2.0}) == "laplace");
}

}  // TEST_SUITE
