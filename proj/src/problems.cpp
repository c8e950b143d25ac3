#include "dyntucker/problems.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace dyntucker {

namespace {

constexpr int64_t kDenseFeasibleEntries = 2'000'000;

int64_t total_entries(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int s : shape) n *= s;
    return n;
}

// Rank-1 state embedded in rank r: the first factor column holds the profile,
// the remaining columns are seeded random directions orthonormalized against
// it. Random padding has support across the whole grid, so the spare rank can
// actually be picked up by the dynamics (coordinate-vector padding would sit
// at the domain boundary where the solution vanishes).
TuckerTensor embed_rank_one(const std::vector<double>& profile, double amplitude, int dim, int mode_size,
                            const RankVector& r, uint64_t seed) {
    double nrm = 0.0;
    for (double v : profile) nrm += v * v;
    nrm = std::sqrt(nrm);

    std::vector<int> core_shape = r;
    DenseTensor core(core_shape);
    double weight = amplitude;
    for (int k = 0; k < dim; ++k) weight *= nrm;
    core[0] = weight;

    std::vector<DenseMatrix> factors;
    factors.reserve(static_cast<size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        // one stream per mode, so the padding of a rank-r state extends the
        // padding of any smaller rank with the same seed
        Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(k + 1));
        const int rk = r[static_cast<size_t>(k)];
        DenseMatrix basis(mode_size, rk);
        for (int i = 0; i < mode_size; ++i) basis(i, 0) = profile[static_cast<size_t>(i)] / nrm;
        for (int j = 1; j < rk; ++j) {
            double* col = basis.col(j);
            for (int i = 0; i < mode_size; ++i) col[i] = rng.gaussian();
        }
        auto [q, rest] = orthonormalize_columns(basis);
        factors.push_back(std::move(q));
    }
    return {std::move(core), std::move(factors)};
}

std::vector<double> interior_grid(int size) {
    std::vector<double> x(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) x[static_cast<size_t>(i)] = static_cast<double>(i + 1) / size;
    return x;
}

std::vector<double> gaussian_bump(const std::vector<double>& grid) {
    std::vector<double> g(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const double dx = grid[i] - 0.5;
        g[i] = std::exp(-100.0 * dx * dx);
    }
    return g;
}

// fixed-substep classic RK4 advancing a dense state
class DenseRk4Reference final : public ReferenceSolution {
public:
    DenseRk4Reference(DenseTensor initial, double substep,
                      std::function<DenseTensor(double, const DenseTensor&)> f)
        : state_(std::move(initial)), substep_(substep), f_(std::move(f)) {}

    DenseTensor at(double t) override {
        if (t < t_ - 1e-12) throw std::invalid_argument("ReferenceSolution: time must be nondecreasing");
        while (t - t_ > 1e-14) {
            const double h = std::min(substep_, t - t_);
            const DenseTensor k1 = f_(t_, state_);
            const DenseTensor k2 = f_(t_ + 0.5 * h, axpy(0.5 * h, k1, state_));
            const DenseTensor k3 = f_(t_ + 0.5 * h, axpy(0.5 * h, k2, state_));
            const DenseTensor k4 = f_(t_ + h, axpy(h, k3, state_));
            DenseTensor incr = axpy(2.0, k2, k1);
            incr = axpy(2.0, k3, incr);
            incr = axpy(1.0, k4, incr);
            state_ = axpy(h / 6.0, incr, state_);
            t_ += h;
        }
        return state_;
    }

private:
    DenseTensor state_;
    double t_ = 0.0;
    double substep_;
    std::function<DenseTensor(double, const DenseTensor&)> f_;
};

class ClosedFormReference final : public ReferenceSolution {
public:
    explicit ClosedFormReference(std::function<DenseTensor(double)> f) : f_(std::move(f)) {}
    DenseTensor at(double t) override { return f_(t); }

private:
    std::function<DenseTensor(double)> f_;
};

}  // namespace

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

DenseMatrix Rng::gaussian_matrix(int rows, int cols) {
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = gaussian();
    return m;
}

DenseTensor Rng::gaussian_tensor(const std::vector<int>& shape) {
    DenseTensor t(shape);
    for (double& v : t.data()) v = gaussian();
    return t;
}

DenseMatrix laplacian_stencil(int size) {
    if (size < 2) throw std::invalid_argument("laplacian_stencil: size must be at least 2");
    const double scale = static_cast<double>(size) * size;  // 1/k² with k = 1/size
    DenseMatrix k(size, size);
    for (int i = 0; i < size; ++i) {
        k(i, i) = -2.0 * scale;
        if (i > 0) k(i, i - 1) = scale;
        if (i + 1 < size) k(i, i + 1) = scale;
    }
    return k;
}

double relative_error(const TuckerTensor& y, const DenseTensor& ref) {
    const double ref_norm = norm(ref);
    if (ref_norm == 0.0) throw std::invalid_argument("relative_error: reference has zero norm");
    return norm(axpy(-1.0, ref, to_full(y))) / ref_norm;
}

double relative_error(const TuckerTensor& y, const TuckerTensor& ref) {
    const double ref_norm = ref.norm();
    if (ref_norm == 0.0) throw std::invalid_argument("relative_error: reference has zero norm");
    const TuckerTensor diff = tucker_sum({y, ref}, {1.0, -1.0});
    return diff.norm() / ref_norm;
}

// ---------------------------------------------------------------------------
// KochLubichProblem

KochLubichProblem::KochLubichProblem(const Params& params, uint64_t seed)
    : params_(params), data_part_({1, 1}), perturbation_({1, 1}) {
    if (params_.inner_rank.size() < 2) throw std::invalid_argument("KochLubichProblem: need at least 2 modes");
    Rng rng(seed);
    const int d = static_cast<int>(params_.inner_rank.size());
    const int size = params_.mode_size;

    std::vector<DenseMatrix> factors;
    factors.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        factors.push_back(qr_orthonormalize(rng.gaussian_matrix(size, params_.inner_rank[static_cast<size_t>(k)])));
    }
    DenseTensor core = rng.gaussian_tensor(params_.inner_rank);
    perturbation_ = rng.gaussian_tensor(std::vector<int>(static_cast<size_t>(d), size));

    data_part_ = core;
    for (int k = 0; k < d; ++k) data_part_ = mode_product(data_part_, k, factors[static_cast<size_t>(k)]);
}

std::vector<int> KochLubichProblem::shape() const { return perturbation_.shape(); }

DenseTensor KochLubichProblem::exact(double t) const {
    return axpy(params_.eps * (1.0 + t + std::sin(3.0 * t)), perturbation_,
                axpy(std::exp(t) - 1.0, data_part_, data_part_));
}

DenseTensor KochLubichProblem::derivative_closed_form(double t) const {
    return axpy(params_.eps * (1.0 + 3.0 * std::cos(3.0 * t)), perturbation_,
                axpy(std::exp(t) - 1.0, data_part_, data_part_));
}

DenseTensor KochLubichProblem::derivative_ode_form(double t) const {
    return axpy(params_.eps * (3.0 * std::cos(3.0 * t) - std::sin(3.0 * t) - t), perturbation_, exact(t));
}

TuckerTensor KochLubichProblem::initial_state(const RankVector& r) const { return hooi(exact(0.0), r); }

RhsValue KochLubichProblem::derivative_at(double t, const TuckerTensor&) const {
    return derivative_closed_form(t);
}

std::unique_ptr<ReferenceSolution> KochLubichProblem::reference() const {
    return std::make_unique<ClosedFormReference>([this](double t) { return exact(t); });
}

// ---------------------------------------------------------------------------
// RotatingDecayProblem

RotatingDecayProblem::RotatingDecayProblem(const Params& params, uint64_t seed)
    : params_(params), core_({1, 1}) {
    if (params_.dim < 2) throw std::invalid_argument("RotatingDecayProblem: dim must be at least 2");
    Rng rng(seed);
    const int d = params_.dim;
    const int size = params_.mode_size;

    skew_.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        const DenseMatrix g = rng.gaussian_matrix(size, size);
        skew_.push_back(mat_scale(0.5, mat_add(g, transpose(g), -1.0)));
    }

    diagonal_.resize(static_cast<size_t>(size));
    core_ = DenseTensor(std::vector<int>(static_cast<size_t>(d), size));
    std::vector<int> idx(static_cast<size_t>(d));
    for (int j = 0; j < size; ++j) {
        diagonal_[static_cast<size_t>(j)] = std::pow(2.0, -static_cast<double>((d - 1) * (j + 1)));
        std::fill(idx.begin(), idx.end(), j);
        core_.at(idx) = diagonal_[static_cast<size_t>(j)];
    }
}

std::vector<int> RotatingDecayProblem::shape() const { return core_.shape(); }

DenseTensor RotatingDecayProblem::exact(double t) const {
    DenseTensor a = core_;
    for (int k = 0; k < params_.dim; ++k) {
        a = mode_product(a, k, matrix_exponential(mat_scale(t, skew_[static_cast<size_t>(k)])));
    }
    const double grow = std::exp(t);
    for (double& v : a.data()) v *= grow;
    return a;
}

TuckerTensor RotatingDecayProblem::initial_state(const RankVector& r) const { return hooi(exact(0.0), r); }

RhsValue RotatingDecayProblem::derivative_at(double t, const TuckerTensor&) const {
    const DenseTensor a = exact(t);
    DenseTensor adot = a;
    for (int k = 0; k < params_.dim; ++k) {
        adot = axpy(1.0, mode_product(a, k, skew_[static_cast<size_t>(k)]), adot);
    }
    return adot;
}

std::unique_ptr<ReferenceSolution> RotatingDecayProblem::reference() const {
    if (total_entries(shape()) > kDenseFeasibleEntries) return nullptr;
    return std::make_unique<ClosedFormReference>([this](double t) { return exact(t); });
}

// ---------------------------------------------------------------------------
// HeatSourceProblem

HeatSourceProblem::HeatSourceProblem(const Params& params, uint64_t seed)
    : params_(params),
      seed_(seed),
      stencil_(mat_scale(kDiffusivity, laplacian_stencil(params.mode_size))),
      grid_(interior_grid(params.mode_size)),
      bump_(gaussian_bump(grid_)) {}

std::vector<int> HeatSourceProblem::shape() const { return {params_.mode_size, params_.mode_size}; }

double HeatSourceProblem::ftcs_limit() const {
    // forward Euler stability bound 2/λ_max for the diffusion operator
    const double lambda_max = 4.0 * kDiffusivity * static_cast<double>(params_.mode_size) * params_.mode_size * 2.0;
    return 2.0 / lambda_max;
}

TuckerTensor HeatSourceProblem::source_term(double t) const {
    const int size = params_.mode_size;
    std::vector<double> s(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) {
        const double x = grid_[static_cast<size_t>(i)];
        s[static_cast<size_t>(i)] = x * std::exp(-t * x);
    }
    return embed_rank_one(s, 1.0, 2, size, {1, 1}, 0);
}

TuckerTensor HeatSourceProblem::initial_state(const RankVector& r) const {
    return embed_rank_one(bump_, 1.0, 2, params_.mode_size, r, seed_);
}

RhsValue HeatSourceProblem::derivative_at(double t, const TuckerTensor& y) const {
    const TuckerTensor diffusion = apply_kron_sum_operator({stencil_, stencil_}, y);
    return tucker_sum({diffusion, source_term(t)}, {1.0, 1.0});
}

std::unique_ptr<ReferenceSolution> HeatSourceProblem::reference() const {
    if (total_entries(shape()) > kDenseFeasibleEntries) return nullptr;
    const int size = params_.mode_size;
    DenseTensor init({size, size});
    for (int j = 0; j < size; ++j)
        for (int i = 0; i < size; ++i)
            init.data()[static_cast<size_t>(i) + static_cast<size_t>(size) * j] =
                bump_[static_cast<size_t>(i)] * bump_[static_cast<size_t>(j)];

    const double lambda_max = 8.0 * kDiffusivity * static_cast<double>(size) * size;
    const double substep = std::min(1e-4, 0.5 / lambda_max);
    auto f = [this, size](double t, const DenseTensor& u) {
        DenseTensor du = axpy(1.0, mode_product(u, 0, stencil_), mode_product(u, 1, stencil_));
        for (int j = 0; j < size; ++j) {
            const double xj = grid_[static_cast<size_t>(j)];
            const double sj = xj * std::exp(-t * xj);
            for (int i = 0; i < size; ++i) {
                const double xi = grid_[static_cast<size_t>(i)];
                du.data()[static_cast<size_t>(i) + static_cast<size_t>(size) * j] +=
                    xi * std::exp(-t * xi) * sj;
            }
        }
        return du;
    };
    return std::make_unique<DenseRk4Reference>(std::move(init), substep, std::move(f));
}

// ---------------------------------------------------------------------------
// ReactionDiffusionProblem

ReactionDiffusionProblem::ReactionDiffusionProblem(const Params& params, uint64_t seed)
    : params_(params),
      seed_(seed),
      stencil_(mat_scale(kDiffusivity, laplacian_stencil(params.mode_size))),
      grid_(interior_grid(params.mode_size)),
      bump_(gaussian_bump(grid_)) {
    if (params_.dim < 2 || params_.dim > 3) {
        throw std::invalid_argument("ReactionDiffusionProblem: dim must be 2 or 3");
    }
}

std::vector<int> ReactionDiffusionProblem::shape() const {
    return std::vector<int>(static_cast<size_t>(params_.dim), params_.mode_size);
}

TuckerTensor ReactionDiffusionProblem::initial_state(const RankVector& r) const {
    return embed_rank_one(bump_, 10.0 * params_.dim, params_.dim, params_.mode_size, r, seed_);
}

RhsValue ReactionDiffusionProblem::derivative_at(double, const TuckerTensor& y) const {
    const std::vector<DenseMatrix> ops(static_cast<size_t>(params_.dim), stencil_);
    const TuckerTensor diffusion = apply_kron_sum_operator(ops, y);

    const RankVector target = y.ranks();
    const TuckerTensor squared = tucker_hadamard(y, y, target);
    const TuckerTensor cubed = tucker_hadamard(squared, y, target);
    const TuckerTensor compressed = recompress(cubed, target);

    return tucker_sum({diffusion, compressed}, {1.0, kReactionCoeff});
}

std::unique_ptr<ReferenceSolution> ReactionDiffusionProblem::reference() const {
    if (total_entries(shape()) > kDenseFeasibleEntries) return nullptr;
    const int d = params_.dim;
    const int size = params_.mode_size;

    DenseTensor init(shape());
    std::vector<int> idx(static_cast<size_t>(d), 0);
    for (int64_t l = 0; l < init.size(); ++l) {
        double v = 10.0 * d;
        for (int k = 0; k < d; ++k) v *= bump_[static_cast<size_t>(idx[static_cast<size_t>(k)])];
        init[l] = v;
        for (int k = 0; k < d; ++k) {
            if (++idx[static_cast<size_t>(k)] < size) break;
            idx[static_cast<size_t>(k)] = 0;
        }
    }

    const double lambda_max = 4.0 * kDiffusivity * static_cast<double>(size) * size * d;
    const double substep = std::min(1e-4, 0.4 / lambda_max);
    auto f = [this, d](double, const DenseTensor& u) {
        DenseTensor du = mode_product(u, 0, stencil_);
        for (int k = 1; k < d; ++k) du = axpy(1.0, mode_product(u, k, stencil_), du);
        auto dd = du.data();
        auto ud = u.data();
        for (size_t i = 0; i < ud.size(); ++i) dd[i] += kReactionCoeff * ud[i] * ud[i] * ud[i];
        return du;
    };
    return std::make_unique<DenseRk4Reference>(std::move(init), substep, std::move(f));
}

// ---------------------------------------------------------------------------

std::unique_ptr<Problem> build_problem(ProblemKind kind, const ProblemParams& params, uint64_t seed) {
    switch (kind) {
        case ProblemKind::koch_lubich: {
            KochLubichProblem::Params p;
            p.mode_size = params.mode_size;
            p.eps = params.eps;
            if (!params.inner_rank.empty()) p.inner_rank = params.inner_rank;
            return std::make_unique<KochLubichProblem>(p, seed);
        }
        case ProblemKind::rotating_decay: {
            RotatingDecayProblem::Params p;
            p.dim = params.dim;
            p.mode_size = params.mode_size;
            return std::make_unique<RotatingDecayProblem>(p, seed);
        }
        case ProblemKind::heat_source: {
            HeatSourceProblem::Params p;
            p.mode_size = params.mode_size;
            return std::make_unique<HeatSourceProblem>(p, seed);
        }
        case ProblemKind::reaction_diffusion: {
            ReactionDiffusionProblem::Params p;
            p.dim = params.dim;
            p.mode_size = params.mode_size;
            return std::make_unique<ReactionDiffusionProblem>(p, seed);
        }
    }
    throw std::invalid_argument("build_problem: unknown problem kind");
}

}  // namespace dyntucker
