#include <catch_amalgamated.hpp>

#include <random>

#include "sigmasurf/su_algebra.hpp"

using namespace sigmasurf;
using Catch::Matchers::WithinAbs;

namespace {

CMatrix random_matrix(int n, std::mt19937& rng) {
    std::normal_distribution<double> d;
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cd(d(rng), d(rng));
    return m;
}

// anti-Hermitian traceless, built without the library
CMatrix random_su(int n, std::mt19937& rng) {
    CMatrix m = random_matrix(n, rng);
    CMatrix a = m - m.adjoint();
    a -= (a.trace() / static_cast<double>(n)) * CMatrix::Identity(n, n);
    return a;
}

// Haar-like unitary from a QR factorization, phase fixed to det 1
CMatrix random_special_unitary(int n, std::mt19937& rng) {
    Eigen::HouseholderQR<CMatrix> qr(random_matrix(n, rng));
    CMatrix q = qr.householderQ();
    const cd det = q.determinant();
    return q * std::pow(det, -1.0 / n);
}

double plain_inner(const CMatrix& a, const CMatrix& b) { return -0.5 * (a * b).trace().real(); }

}  // namespace

TEST_CASE("inner product examples") {
    const auto b = standard_basis(2);
    CMatrix c1(2, 2);
    c1 << I, 0.0, 0.0, -I;
    CHECK_THAT(inner(c1, c1), WithinAbs(1.0, 1e-15));
    CHECK_THAT(inner(b[0], b[1]), WithinAbs(0.0, 1e-15));
    CHECK(inner(AlgebraElement::zero(2), b[2]) == 0.0);
    CHECK_THROWS_AS(inner(CMatrix::Zero(2, 2), CMatrix::Zero(3, 3)), DimensionError);
}

TEST_CASE("su(2) basis matches the explicit matrices") {
    const auto b = standard_basis(2);
    REQUIRE(b.size() == 3);
    CMatrix a12(2, 2), b12(2, 2), c1(2, 2);
    a12 << 0.0, I, I, 0.0;
    b12 << 0.0, 1.0, -1.0, 0.0;
    c1 << I, 0.0, 0.0, -I;
    CHECK((b[0].matrix() - a12).norm() == 0.0);
    CHECK((b[1].matrix() - b12).norm() == 0.0);
    CHECK((b[2].matrix() - c1).norm() < 1e-15);
    CHECK(b.labels[0].str() == "A12");
    CHECK(b.labels[1].str() == "B12");
    CHECK(b.labels[2].str() == "C1");
}

TEST_CASE("standard basis is orthonormal") {
    for (int n = 2; n <= 5; ++n) {
        const auto b = standard_basis(n);
        REQUIRE(static_cast<int>(b.size()) == n * n - 1);
        Eigen::MatrixXd g(b.size(), b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = plain_inner(b[i].matrix(), b[j].matrix());
        CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((gram(b.elements) - g).cwiseAbs().maxCoeff() < 1e-15);
    }
    const auto b3 = standard_basis(3);
    std::vector<std::string> names;
    for (const auto& l : b3.labels) names.push_back(l.str());
    CHECK(names == std::vector<std::string>{"A12", "A13", "A23", "B12", "B13", "B23", "C1", "C2"});
    CHECK_THROWS_AS(standard_basis(1), DimensionError);
}

TEST_CASE("coordinates") {
    const auto b = standard_basis(2);
    const RVector c = coords(b[2], b);
    CHECK((c - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
    CHECK(coords(AlgebraElement::zero(2), b).norm() == 0.0);

    std::mt19937 rng(7);
    for (int n = 2; n <= 4; ++n) {
        const auto bn = standard_basis(n);
        for (int k = 0; k < 5; ++k) {
            const CMatrix a = random_su(n, rng);
            const AlgebraElement back = from_coords(coords(a, bn), bn);
            CHECK((back.matrix() - a).norm() < 1e-12);
        }
    }
    CHECK_THROWS_AS(from_coords(RVector::Zero(2), b), DimensionError);
    CHECK_THROWS_AS(coords(CMatrix::Zero(3, 3), b), DimensionError);
}

TEST_CASE("element validation") {
    CMatrix herm(2, 2);
    herm << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(AlgebraElement(herm), ParameterError);
    CMatrix traced(2, 2);
    traced << I, 0.0, 0.0, I;
    CHECK_THROWS_AS(AlgebraElement(traced), ParameterError);
    CHECK_THROWS_AS(AlgebraElement(CMatrix::Zero(2, 3)), DimensionError);
    CHECK_THROWS_AS(AlgebraElement(CMatrix::Zero(1, 1)), DimensionError);

    std::mt19937 rng(3);
    const CMatrix m = random_matrix(3, rng);
    const AlgebraElement p = project_to_algebra(m);
    CHECK((p.matrix() + p.matrix().adjoint()).norm() < 1e-14);
    CHECK(std::abs(p.matrix().trace()) < 1e-14);
    CHECK((project_to_algebra(p.matrix()).matrix() - p.matrix()).norm() < 1e-14);
}

TEST_CASE("adjoint invariance and commutators") {
    std::mt19937 rng(11);
    for (int n = 2; n <= 4; ++n) {
        const CMatrix u = random_special_unitary(n, rng);
        CHECK((u * u.adjoint() - CMatrix::Identity(n, n)).norm() < 1e-12);
        CHECK(std::abs(u.determinant() - 1.0) < 1e-12);
        const AlgebraElement a(random_su(n, rng)), b(random_su(n, rng)), c(random_su(n, rng));
        CHECK_THAT(inner(a.conjugated(u), b.conjugated(u)), WithinAbs(inner(a, b), 1e-12));
        // [a,b] stays in the algebra
        CHECK_NOTHROW(AlgebraElement(commutator(a.matrix(), b.matrix())));
        // ad-invariance of the form
        CHECK_THAT(inner(commutator(a.matrix(), b.matrix()), c.matrix()),
                   WithinAbs(inner(a.matrix(), commutator(b.matrix(), c.matrix())), 1e-11));
        const CMatrix jac = commutator(a.matrix(), commutator(b.matrix(), c.matrix())) +
                            commutator(b.matrix(), commutator(c.matrix(), a.matrix())) +
                            commutator(c.matrix(), commutator(a.matrix(), b.matrix()));
        CHECK(jac.norm() < 1e-11);
        CHECK_THAT(inner(a, b), WithinAbs(plain_inner(a.matrix(), b.matrix()), 1e-13));
        CHECK_THAT(algebra_norm((a * 2.0).matrix()), WithinAbs(2.0 * algebra_norm(a.matrix()), 1e-12));
    }
}
