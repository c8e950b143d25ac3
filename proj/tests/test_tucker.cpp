#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dyntucker/tucker.hpp"
#include "test_support.hpp"

using namespace dyntucker;

namespace {

TuckerTensor exact_rank_content(dyntucker::Rng& rng, const std::vector<int>& shape, const RankVector& r) {
    return oracle::random_tucker(rng, shape, r);
}

}  // namespace

TEST_CASE("constructor enforces the Tucker invariants") {
    auto rng = oracle::make_rng(41);
    DenseTensor core = rng.gaussian_tensor({2, 2});
    std::vector<DenseMatrix> bad = {rng.gaussian_matrix(5, 2), oracle::random_orthonormal(rng, 5, 2)};
    CHECK_THROWS_AS(TuckerTensor(core, bad), std::invalid_argument);

    std::vector<DenseMatrix> wrong_rank = {oracle::random_orthonormal(rng, 5, 3),
                                           oracle::random_orthonormal(rng, 5, 2)};
    CHECK_THROWS_AS(TuckerTensor(core, wrong_rank), std::invalid_argument);

    // rank above the mode size is impossible
    CHECK_THROWS_AS(TuckerTensor(DenseTensor({3, 2}), std::vector<DenseMatrix>{DenseMatrix(2, 3), DenseMatrix(2, 2)}),
                    std::invalid_argument);
}

TEST_CASE("to_full of a rank-1 scalar core is an outer product") {
    DenseTensor core({1, 1}, {2.0});
    DenseMatrix u1(3, 1), u2(4, 1);
    u1(1, 0) = 1.0;
    u2(2, 0) = 1.0;
    TuckerTensor y(core, {u1, u2});
    DenseTensor full = to_full(y);
    CHECK(full.at(std::vector<int>{1, 2}) == 2.0);
    CHECK(norm(full) == doctest::Approx(2.0));
}

TEST_CASE("to_full with identity factors returns the core") {
    auto rng = oracle::make_rng(42);
    DenseTensor core = rng.gaussian_tensor({3, 4, 2});
    std::vector<DenseMatrix> id = {DenseMatrix::identity(3), DenseMatrix::identity(4), DenseMatrix::identity(2)};
    CHECK(oracle::max_abs_diff(to_full(TuckerTensor(core, id)), core) == 0.0);
}

TEST_CASE("Tucker unfolding identity against the dense Kronecker oracle") {
    auto rng = oracle::make_rng(43);
    TuckerTensor y = oracle::random_tucker(rng, {4, 5, 3}, {2, 3, 2});
    const DenseTensor full = to_full(y);
    for (int n = 0; n < 3; ++n) {
        // X_(n) = U_n C_(n) (⊗_{k≠n} U_k)ᵀ
        const DenseMatrix expected =
            mat_mult(mat_mul(y.factor(n), unfold(y.core(), n)), oracle::kron_skip(y.factors(), n));
        CHECK(oracle::max_abs_diff(unfold(full, n), expected) < 1e-12 * norm(full));
    }
}

TEST_CASE("norm equals core norm for orthonormal factors") {
    auto rng = oracle::make_rng(44);
    TuckerTensor y = oracle::random_tucker(rng, {5, 6, 4}, {2, 2, 3});
    CHECK(y.norm() == doctest::Approx(norm(to_full(y))).epsilon(1e-10));
}

TEST_CASE("gauge_rotate preserves the represented tensor") {
    auto rng = oracle::make_rng(45);
    TuckerTensor y = oracle::random_tucker(rng, {5, 4}, {3, 2});

    std::vector<DenseMatrix> id = {DenseMatrix::identity(3), DenseMatrix::identity(2)};
    TuckerTensor same = gauge_rotate(y, id);
    CHECK(oracle::max_abs_diff(to_full(same), to_full(y)) == 0.0);

    std::vector<DenseMatrix> q = {oracle::random_orthonormal(rng, 3, 3), oracle::random_orthonormal(rng, 2, 2)};
    TuckerTensor rotated = gauge_rotate(y, q);
    CHECK(oracle::max_abs_diff(to_full(rotated), to_full(y)) < 1e-12 * y.norm());
    CHECK(rotated.norm() == doctest::Approx(y.norm()).epsilon(1e-12));

    std::vector<DenseMatrix> not_orth = {rng.gaussian_matrix(3, 3), DenseMatrix::identity(2)};
    CHECK_THROWS_AS(gauge_rotate(y, not_orth), std::invalid_argument);
}

TEST_CASE("hosvd recovers exact-rank content and full rank exactly") {
    auto rng = oracle::make_rng(46);
    const std::vector<int> shape = {5, 4, 6};
    const RankVector r = {2, 3, 2};
    const DenseTensor a = to_full(exact_rank_content(rng, shape, r));

    TuckerTensor y = hosvd(a, r);
    CHECK(norm(axpy(-1.0, a, to_full(y))) <= 1e-10 * norm(a));

    TuckerTensor full = hosvd(a, {5, 4, 6});
    CHECK(norm(axpy(-1.0, a, to_full(full))) <= 1e-10 * norm(a));
}

TEST_CASE("hosvd error is at least the HOOI error on random data") {
    auto rng = oracle::make_rng(47);
    const DenseTensor a = rng.gaussian_tensor({6, 6, 6});
    const RankVector r = {2, 2, 2};
    const double hosvd_err = norm(axpy(-1.0, a, to_full(hosvd(a, r))));
    const double hooi_err = norm(axpy(-1.0, a, to_full(hooi(a, r))));
    CHECK(hooi_err <= hosvd_err + 1e-12);
}

TEST_CASE("hooi: zero residual on exact rank, monotone fit, SVD agreement for matrices") {
    auto rng = oracle::make_rng(48);
    const DenseTensor a = to_full(exact_rank_content(rng, {6, 5, 4}, {2, 2, 2}));
    TuckerTensor y = hooi(a, {2, 2, 2});
    CHECK(norm(axpy(-1.0, a, to_full(y))) <= 1e-10 * norm(a));

    const DenseTensor b = rng.gaussian_tensor({7, 6, 5});
    HooiReport report;
    hooi(b, {2, 3, 2}, {}, &report);
    for (size_t s = 1; s < report.fit_history.size(); ++s) {
        CHECK(report.fit_history[s] >= report.fit_history[s - 1] - 1e-13 * report.fit_history[s - 1]);
    }

    // d=2: HOOI is the truncated SVD
    const DenseTensor m = rng.gaussian_tensor({9, 7});
    TuckerTensor trunc = hooi(m, {3, 3});
    const SvdResult svd = economy_svd(unfold(m, 0));
    double tail = 0.0;
    for (size_t j = 3; j < svd.singular_values.size(); ++j) tail += svd.singular_values[j] * svd.singular_values[j];
    CHECK(norm(axpy(-1.0, m, to_full(trunc))) == doctest::Approx(std::sqrt(tail)).epsilon(1e-10));
}

TEST_CASE("tucker_sum matches the dense linear combination") {
    auto rng = oracle::make_rng(49);
    const std::vector<int> shape = {6, 5, 6};
    TuckerTensor y = oracle::random_tucker(rng, shape, {2, 2, 2});

    // adding a zero tensor changes nothing
    TuckerTensor zero = oracle::random_tucker(rng, shape, {1, 1, 1});
    TuckerTensor sum0 = tucker_sum({y, zero}, {1.0, 0.0});
    CHECK(oracle::max_abs_diff(to_full(sum0), to_full(y)) < 1e-12 * y.norm());

    TuckerTensor cancel = tucker_sum({y, y}, {1.0, -1.0});
    CHECK(cancel.norm() < 1e-12 * y.norm());

    std::vector<TuckerTensor> terms;
    std::vector<double> coeffs = {0.7, -1.3, 2.1};
    for (int i = 0; i < 3; ++i) terms.push_back(oracle::random_tucker(rng, shape, {2, 2, 2}));
    TuckerTensor sum = tucker_sum(terms, coeffs);
    DenseTensor expected(shape);
    for (int i = 0; i < 3; ++i) expected = axpy(coeffs[static_cast<size_t>(i)], to_full(terms[static_cast<size_t>(i)]), expected);
    CHECK(oracle::max_abs_diff(to_full(sum), expected) < 1e-12 * norm(expected));
    for (int k = 0; k < 3; ++k) CHECK(gram_deviation(sum.factor(k)) < 1e-10);
}

TEST_CASE("tucker_sum caps concatenated ranks at the mode size") {
    auto rng = oracle::make_rng(50);
    const std::vector<int> shape = {3, 4};
    std::vector<TuckerTensor> terms;
    for (int i = 0; i < 3; ++i) terms.push_back(oracle::random_tucker(rng, shape, {2, 2}));
    // concatenated rank would be 6 > 3 in mode 0
    TuckerTensor sum = tucker_sum(terms, {1.0, 1.0, 1.0});
    CHECK(sum.core().extent(0) <= 3);
    DenseTensor expected(shape);
    for (const TuckerTensor& t : terms) expected = axpy(1.0, to_full(t), expected);
    CHECK(oracle::max_abs_diff(to_full(sum), expected) < 1e-12 * norm(expected));
}

TEST_CASE("tucker_hadamard agrees with the elementwise oracle") {
    auto rng = oracle::make_rng(51);
    const std::vector<int> shape = {6, 6};
    TuckerTensor y = oracle::random_tucker(rng, shape, {2, 2});

    // multiplying with all-ones (rank 1) is the identity
    DenseTensor one_core({1, 1}, {static_cast<double>(shape[0]) * shape[1] /
                                  (std::sqrt(static_cast<double>(shape[0])) * std::sqrt(static_cast<double>(shape[1])))});
    DenseMatrix u1(shape[0], 1), u2(shape[1], 1);
    for (int i = 0; i < shape[0]; ++i) u1(i, 0) = 1.0 / std::sqrt(static_cast<double>(shape[0]));
    for (int i = 0; i < shape[1]; ++i) u2(i, 0) = 1.0 / std::sqrt(static_cast<double>(shape[1]));
    TuckerTensor ones(DenseTensor({1, 1}, {std::sqrt(static_cast<double>(shape[0] * shape[1]))}), {u1, u2});
    CHECK(oracle::max_abs_diff(to_full(ones), DenseTensor(shape, std::vector<double>(36, 1.0))) < 1e-12);
    TuckerTensor same = tucker_hadamard(y, ones);
    CHECK(oracle::max_abs_diff(to_full(same), to_full(y)) < 1e-12 * y.norm());

    // rank-1 times rank-1 is rank-1 with multiplied profiles
    TuckerTensor r1 = oracle::random_tucker(rng, shape, {1, 1});
    TuckerTensor r2 = oracle::random_tucker(rng, shape, {1, 1});
    TuckerTensor prod = tucker_hadamard(r1, r2);
    CHECK(prod.core().extent(0) == 1);
    CHECK(oracle::max_abs_diff(to_full(prod), hadamard_dense(to_full(r1), to_full(r2))) < 1e-12);

    TuckerTensor other = oracle::random_tucker(rng, shape, {2, 2});
    TuckerTensor had = tucker_hadamard(y, other);
    CHECK(oracle::max_abs_diff(to_full(had), hadamard_dense(to_full(y), to_full(other))) <
          1e-12 * norm(hadamard_dense(to_full(y), to_full(other))));
    (void)one_core;
}

TEST_CASE("tucker_hadamard overflow guard and recompress-first policy") {
    auto rng = oracle::make_rng(52);
    const std::vector<int> shape = {5, 5};
    TuckerTensor a = oracle::random_tucker(rng, shape, {3, 3});
    TuckerTensor b = oracle::random_tucker(rng, shape, {2, 2});
    // product rank 6 > 5: hard error without an overflow rank
    CHECK_THROWS_AS(tucker_hadamard(a, b), std::invalid_argument);

    // with an overflow rank the inputs are recompressed first and the result
    // approximates the dense product
    TuckerTensor guarded = tucker_hadamard(a, b, RankVector{2, 2});
    CHECK(guarded.core().extent(0) <= 4);
    const DenseTensor dense = hadamard_dense(to_full(a), to_full(b));
    // rank-2 recompression of a inside the product loses accuracy; just check
    // the result is a sane approximation rather than garbage
    CHECK(norm(axpy(-1.0, dense, to_full(guarded))) < 0.9 * norm(dense));
}

TEST_CASE("apply_kron_sum_operator matches the dense Kronecker-sum action") {
    auto rng = oracle::make_rng(53);
    const std::vector<int> shape = {5, 5};
    TuckerTensor y = oracle::random_tucker(rng, shape, {2, 2});

    std::vector<DenseMatrix> zero = {DenseMatrix(5, 5), DenseMatrix(5, 5)};
    CHECK(apply_kron_sum_operator(zero, y).norm() < 1e-14);

    std::vector<DenseMatrix> id = {DenseMatrix::identity(5), DenseMatrix::identity(5)};
    TuckerTensor twice = apply_kron_sum_operator(id, y);
    CHECK(oracle::max_abs_diff(to_full(twice), axpy(1.0, to_full(y), to_full(y))) < 1e-12 * y.norm());

    std::vector<DenseMatrix> ops = {rng.gaussian_matrix(5, 5), rng.gaussian_matrix(5, 5)};
    TuckerTensor applied = apply_kron_sum_operator(ops, y);
    // oracle: (K₁⊗I + I⊗K₂)·vec, with vec the mode-major layout (mode 1 fastest)
    const DenseMatrix op =
        mat_add(oracle::kron(DenseMatrix::identity(5), ops[0]), oracle::kron(ops[1], DenseMatrix::identity(5)));
    const DenseTensor full = to_full(y);
    std::vector<double> expected(25, 0.0);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j) expected[static_cast<size_t>(i)] += op(i, j) * full[j];
    CHECK(oracle::max_abs_diff(to_full(applied), DenseTensor(shape, expected)) < 1e-12 * y.norm());
}

TEST_CASE("recompress: same rank is gauge-equivalent, exact content lossless") {
    auto rng = oracle::make_rng(54);
    TuckerTensor y = oracle::random_tucker(rng, {6, 5, 4}, {3, 2, 2});
    TuckerTensor same = recompress(y, {3, 2, 2});
    CHECK(oracle::max_abs_diff(to_full(same), to_full(y)) < 1e-10 * y.norm());

    // rank-2 content stored with redundant rank 4 compresses losslessly
    TuckerTensor content = oracle::random_tucker(rng, {7, 7}, {2, 2});
    TuckerTensor redundant = tucker_sum({content, content}, {0.5, 0.5});  // rank 4 representation
    TuckerTensor reduced = recompress(redundant, {2, 2});
    CHECK(oracle::max_abs_diff(to_full(reduced), to_full(content)) < 1e-10 * content.norm());
}

TEST_CASE("recompress matches dense HOOI reconstruction error") {
    auto rng = oracle::make_rng(55);
    TuckerTensor y = oracle::random_tucker(rng, {6, 6}, {4, 4});
    const DenseTensor full = to_full(y);

    TuckerTensor structured = recompress(y, {2, 2});
    TuckerTensor dense_path = hooi(full, {2, 2});
    const double err_structured = norm(axpy(-1.0, full, to_full(structured)));
    const double err_dense = norm(axpy(-1.0, full, to_full(dense_path)));
    CHECK(err_structured == doctest::Approx(err_dense).epsilon(1e-8));
}

TEST_CASE("structured ops never misreport invariants on shapes up to (6,6,6)") {
    auto rng = oracle::make_rng(56);
    const std::vector<int> shape = {6, 6, 6};
    TuckerTensor a = oracle::random_tucker(rng, shape, {2, 2, 2});
    TuckerTensor b = oracle::random_tucker(rng, shape, {2, 2, 2});

    TuckerTensor sum = tucker_sum({a, b}, {1.0, 2.0});
    CHECK(oracle::max_abs_diff(to_full(sum), axpy(2.0, to_full(b), to_full(a))) < 1e-12 * sum.norm());

    TuckerTensor had = tucker_hadamard(a, b);
    CHECK(oracle::max_abs_diff(to_full(had), hadamard_dense(to_full(a), to_full(b))) < 1e-12 * (1.0 + had.norm()));

    std::vector<DenseMatrix> ops;
    for (int k = 0; k < 3; ++k) ops.push_back(rng.gaussian_matrix(6, 6));
    TuckerTensor lap = apply_kron_sum_operator(ops, a);
    DenseTensor expect(shape);
    for (int k = 0; k < 3; ++k) expect = axpy(1.0, mode_product(to_full(a), k, ops[static_cast<size_t>(k)]), expect);
    CHECK(oracle::max_abs_diff(to_full(lap), expect) < 1e-12 * norm(expect));

    for (const TuckerTensor* t : {&sum, &had, &lap}) {
        for (int k = 0; k < 3; ++k) CHECK(gram_deviation(t->factor(k)) <= 1e-10);
    }
}

TEST_CASE("shape mismatches are hard errors") {
    auto rng = oracle::make_rng(57);
    TuckerTensor a = oracle::random_tucker(rng, {4, 4}, {2, 2});
    TuckerTensor b = oracle::random_tucker(rng, {4, 5}, {2, 2});
    CHECK_THROWS_AS(tucker_sum({a, b}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(tucker_hadamard(a, b), std::invalid_argument);
    CHECK_THROWS_AS(apply_kron_sum_operator({DenseMatrix(3, 3), DenseMatrix(4, 4)}, a), std::invalid_argument);
    CHECK_THROWS_AS(hosvd(to_full(a), {5, 2}), std::invalid_argument);
    CHECK_THROWS_AS(recompress(a, {0, 2}), std::invalid_argument);
}
