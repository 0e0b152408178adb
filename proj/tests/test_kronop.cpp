#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stiga/kronop.hpp"

using namespace stiga;

namespace {

// dense Kronecker oracle, kron(C, D) with the paper's block layout
DenseMatrix dense_kron(const DenseMatrix& C, const DenseMatrix& D) {
    DenseMatrix K(C.rows() * D.rows(), C.cols() * D.cols());
    for (Index i = 0; i < C.rows(); ++i)
        for (Index j = 0; j < C.cols(); ++j)
            K.block(i * D.rows(), j * D.cols(), D.rows(), D.cols()) = C(i, j) * D;
    return K;
}

// kron(J_D, ..., J_1) assembled densely
DenseMatrix dense_kron_chain(const std::vector<DenseMatrix>& factors) {
    DenseMatrix K = factors.front();
    for (size_t l = 1; l < factors.size(); ++l)
        K = dense_kron(factors[l], K);
    return K;
}

DenseMatrix random_matrix(Index r, Index c, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    DenseMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            m(i, j) = dist(rng);
    return m;
}

} // namespace

TEST_CASE("mode product: identity and scaling") {
    Tensor x;
    x.dims = {2, 2};
    x.data.resize(4);
    x.data << 1, 3, 2, 4; // vec([[1,2],[3,4]]) colexicographic

    const Tensor xi = mode_product(x, KronFactor(DenseMatrix::Identity(2, 2)), 0);
    CHECK((xi.data - x.data).cwiseAbs().maxCoeff() == 0.0);

    DenseMatrix s(2, 2);
    s << 2, 0, 0, 2;
    const Tensor xs = mode_product(x, KronFactor(s), 0);
    Vector expect(4);
    expect << 2, 6, 4, 8;
    CHECK((xs.data - expect).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK_THROWS_AS(mode_product(x, KronFactor(DenseMatrix::Identity(3, 3)), 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(mode_product(x, KronFactor(s), 2), std::invalid_argument);
}

TEST_CASE("mode product against the vectorization identity") {
    // X x_m J == unvec( (I (x) J (x) I) vec X ) for a 3x4x5 tensor, 6x4 J
    Tensor x;
    x.dims = {3, 4, 5};
    x.data = random_matrix(60, 1, 11).col(0);
    const DenseMatrix J = random_matrix(6, 4, 12);
    const Tensor y = mode_product(x, KronFactor(J), 1);
    const DenseMatrix big =
        dense_kron_chain({DenseMatrix::Identity(3, 3), J, DenseMatrix::Identity(5, 5)});
    CHECK((y.data - big * x.data).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("mode products over distinct modes commute") {
    Tensor x;
    x.dims = {3, 4, 5};
    x.data = random_matrix(60, 1, 21).col(0);
    const KronFactor A(random_matrix(3, 3, 22));
    const KronFactor C(random_matrix(5, 5, 23));
    const Tensor ac = mode_product(mode_product(x, A, 0), C, 2);
    const Tensor ca = mode_product(mode_product(x, C, 2), A, 0);
    CHECK((ac.data - ca.data).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("kron_matvec equals the dense Kronecker product") {
    SUBCASE("identity factors") {
        const Vector x = random_matrix(8, 1, 31).col(0);
        const std::vector<KronFactor> factors{KronFactor(DenseMatrix::Identity(2, 2)),
                                              KronFactor(DenseMatrix::Identity(2, 2)),
                                              KronFactor(DenseMatrix::Identity(2, 2))};
        CHECK((kron_matvec(factors, x) - x).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("hand example") {
        DenseMatrix J1(2, 2), J2(2, 2);
        J1 << 1, 0, 0, 2;
        J2 << 0, 1, 1, 0;
        Vector x(4);
        x << 1, 3, 2, 4;
        const Vector y = kron_matvec({KronFactor(J1), KronFactor(J2)}, x);
        const Vector expect = dense_kron(J2, J1) * x;
        CHECK((y - expect).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("random 3x3x3") {
        const DenseMatrix A = random_matrix(3, 3, 41), B = random_matrix(3, 3, 42),
                          C = random_matrix(3, 3, 43);
        const Vector x = random_matrix(27, 1, 44).col(0);
        const Vector y = kron_matvec({KronFactor(A), KronFactor(B), KronFactor(C)}, x);
        const Vector expect = dense_kron_chain({A, B, C}) * x;
        CHECK((y - expect).norm() <= 1e-13 * expect.norm());
    }
    SUBCASE("columns match for every basis vector") {
        const DenseMatrix A = random_matrix(4, 4, 51), B = random_matrix(4, 4, 52),
                          C = random_matrix(4, 4, 53);
        const DenseMatrix big = dense_kron_chain({A, B, C});
        const std::vector<KronFactor> factors{KronFactor(A), KronFactor(SparseMatrix(B.sparseView())),
                                              KronFactor(C)};
        for (Index j = 0; j < 64; ++j) {
            Vector e = Vector::Zero(64);
            e(j) = 1.0;
            CHECK((kron_matvec(factors, e) - big.col(j)).cwiseAbs().maxCoeff() <= 1e-13);
        }
    }
}

TEST_CASE("KronSumOperator") {
    SUBCASE("scalar factors") {
        DenseMatrix w(1, 1), m(1, 1);
        w << 0.5;
        m << 1.0 / 3.0;
        const KronSumOperator op({1, 1}, {KronTerm{2.0, {KronFactor(m), KronFactor(w)}}});
        Vector x(1);
        x << 3.0;
        CHECK(op.apply(x)(0) == doctest::Approx(2.0 * 0.5 * (1.0 / 3.0) * 3.0));
    }
    SUBCASE("term dropout") {
        const DenseMatrix Ms = random_matrix(3, 3, 61), Wt = random_matrix(4, 4, 62),
                          Ks = random_matrix(3, 3, 63), Mt = random_matrix(4, 4, 64);
        const KronSumOperator both({3, 4}, {KronTerm{1.0, {KronFactor(Ms), KronFactor(Wt)}},
                                            KronTerm{0.0, {KronFactor(Ks), KronFactor(Mt)}}});
        const KronSumOperator one({3, 4}, {KronTerm{1.0, {KronFactor(Ms), KronFactor(Wt)}}});
        const Vector x = random_matrix(12, 1, 65).col(0);
        CHECK((both.apply(x) - one.apply(x)).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("matches dense assembly and is linear") {
        const DenseMatrix A1 = random_matrix(3, 3, 71), A2 = random_matrix(3, 3, 72);
        const DenseMatrix B1 = random_matrix(3, 3, 73), B2 = random_matrix(3, 3, 74);
        const KronSumOperator op({3, 3}, {KronTerm{1.7, {KronFactor(A1), KronFactor(A2)}},
                                          KronTerm{-0.3, {KronFactor(B1), KronFactor(B2)}}});
        const DenseMatrix dense = 1.7 * dense_kron(A2, A1) - 0.3 * dense_kron(B2, B1);
        const Vector x = random_matrix(9, 1, 75).col(0);
        const Vector y = random_matrix(9, 1, 76).col(0);
        CHECK((op.apply(x) - dense * x).norm() <= 1e-13 * x.norm());

        const Vector lhs = op.apply(2.0 * x - 3.0 * y);
        const Vector rhs = 2.0 * op.apply(x) - 3.0 * op.apply(y);
        CHECK((lhs - rhs).norm() <= 1e-13 * (rhs.norm() + 1.0));
    }
    SUBCASE("diagonal matches the dense oracle") {
        const DenseMatrix A1 = random_matrix(3, 3, 81), A2 = random_matrix(3, 3, 82);
        const DenseMatrix B1 = random_matrix(3, 3, 83), B2 = random_matrix(3, 3, 84);
        const KronSumOperator op({3, 3}, {KronTerm{1.0, {KronFactor(A1), KronFactor(A2)}},
                                          KronTerm{2.5, {KronFactor(B1), KronFactor(B2)}}});
        const DenseMatrix dense = dense_kron(A2, A1) + 2.5 * dense_kron(B2, B1);
        CHECK((op.diagonal() - dense.diagonal()).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("dimension validation") {
        CHECK_THROWS_AS(KronSumOperator({3, 4}, {KronTerm{1.0, {KronFactor(DenseMatrix::Identity(3, 3)),
                                                                KronFactor(DenseMatrix::Identity(3, 3))}}}),
                        std::invalid_argument);
    }
}
