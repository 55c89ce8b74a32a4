#include "dgreedy/problem.hpp"

#include <cmath>
#include <future>
#include <list>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace dgreedy {

Vec ThetaMap::eval(double mu) const {
    Vec t(static_cast<Eigen::Index>(fns.size()));
    for (std::size_t k = 0; k < fns.size(); ++k) t(static_cast<Eigen::Index>(k)) = fns[k](mu);
    return t;
}

ThetaMap ThetaMap::constant_one() {
    ThetaMap m;
    m.fns.push_back([](double) { return 1.0; });
    return m;
}

SpMat AffineOperator::at(double mu) const {
    if (components.empty()) throw StateError("AffineOperator: no components");
    const Vec t = theta.eval(mu);
    SpMat out(rows(), cols());
    for (std::size_t k = 0; k < components.size(); ++k) {
        const double w = t(static_cast<Eigen::Index>(k));
        if (w != 0.0) out += w * components[k];
    }
    out.makeCompressed();
    return out;
}

Vec AffineOperator::apply(double mu, const Vec& x) const {
    const Vec t = theta.eval(mu);
    Vec y = Vec::Zero(rows());
    for (std::size_t k = 0; k < components.size(); ++k) {
        const double w = t(static_cast<Eigen::Index>(k));
        if (w != 0.0) y += w * (components[k] * x);
    }
    return y;
}

void AffineOperator::validate(const std::string& what) const {
    if (components.empty()) throw StateError(what + ": no components");
    if (components.size() != theta.size())
        throw StateError(what + ": component count does not match theta map");
    for (const auto& c : components)
        if (c.rows() != rows() || c.cols() != cols())
            throw ShapeError(what + ": components differ in shape");
}

Vec AffineVector::at(double mu) const {
    const Vec t = theta.eval(mu);
    Vec out = Vec::Zero(size());
    for (std::size_t k = 0; k < components.size(); ++k) out += t(static_cast<Eigen::Index>(k)) * components[k];
    return out;
}

void ParameterDomain::validate() const {
    if (!(lo > 0.0) || !(hi < std::numbers::pi))
        throw ConfigError("parameter_interval", "interval must lie inside (0, pi)");
    if (!(lo <= hi)) throw ConfigError("parameter_interval", "empty interval");
    if (samples < 1) throw ConfigError("sample_count", "empty sample set");
    if (samples < 2 && lo != hi) throw ConfigError("sample_count", "need at least two samples");
}

std::vector<double> ParameterDomain::sample_points() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(samples));
    if (samples == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < samples; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (samples - 1);
    out.back() = hi;
    return out;
}

bool ParameterDomain::contains(double mu) const {
    const double slack = 1e-12;
    return mu >= lo - slack && mu <= hi + slack;
}

bool CoverPiece::contains(double mu) const {
    const bool above = open_lo ? mu > lo : mu >= lo - 1e-12;
    return above && mu <= hi + 1e-12;
}

std::vector<CoverPiece> cover_pieces(const ParameterDomain& domain) {
    domain.validate();
    std::vector<CoverPiece> out;
    if (domain.lo <= kSplitAngle) {
        CoverPiece p;
        p.lo = domain.lo;
        p.hi = std::min(domain.hi, kSplitAngle);
        p.inflow = {Edge::bottom, Edge::left};
        p.outflow = {Edge::top, Edge::right};
        out.push_back(p);
    }
    if (domain.hi > kSplitAngle) {
        CoverPiece p;
        p.lo = std::max(domain.lo, kSplitAngle);
        p.open_lo = domain.lo <= kSplitAngle;
        p.hi = domain.hi;
        p.inflow = {Edge::bottom, Edge::right};
        p.outflow = {Edge::top, Edge::left};
        out.push_back(p);
    }
    return out;
}

const CoverPiece& piece_of(const std::vector<CoverPiece>& pieces, double mu) {
    for (const auto& p : pieces)
        if (p.contains(mu)) return p;
    throw DomainError("parameter outside every cover piece");
}

class RieszCache {
public:
    using Factor = std::shared_ptr<const SparseSpdFactor>;

    explicit RieszCache(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

    Factor get(double key, const std::function<SpMat()>& build) {
        std::promise<Factor> promise;
        std::shared_future<Factor> fut;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it != entries_.end()) {
                lru_.splice(lru_.begin(), lru_, it->second.pos);
                fut = it->second.future;
            } else {
                lru_.push_front(key);
                fut = promise.get_future().share();
                entries_.emplace(key, Entry{fut, lru_.begin()});
                while (entries_.size() > capacity_) {
                    entries_.erase(lru_.back());
                    lru_.pop_back();
                }
                ++factorizations_;
                fut = std::shared_future<Factor>();
            }
        }
        if (fut.valid()) return fut.get();
        try {
            auto f = std::make_shared<const SparseSpdFactor>(build());
            promise.set_value(f);
            return f;
        } catch (...) {
            promise.set_exception(std::current_exception());
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it != entries_.end()) {
                lru_.erase(it->second.pos);
                entries_.erase(it);
            }
            throw;
        }
    }

    void set_capacity(std::size_t c) {
        std::lock_guard<std::mutex> lock(mutex_);
        capacity_ = std::max<std::size_t>(1, c);
    }

    std::size_t factorizations() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return factorizations_;
    }

private:
    struct Entry {
        std::shared_future<Factor> future;
        std::list<double>::iterator pos;
    };
    mutable std::mutex mutex_;
    std::size_t capacity_;
    std::list<double> lru_;
    std::map<double, Entry> entries_;
    std::size_t factorizations_ = 0;
};

SaddleProblem::SaddleProblem() : cache_(std::make_shared<RieszCache>(100)) {}

SaddleProblem::SaddleProblem(const SaddleProblem& o)
    : kind(o.kind), name(o.name), piece(o.piece), samples(o.samples), trial_space(o.trial_space),
      test_space(o.test_space), op(o.op), riesz_y(o.riesz_y), a_form(o.a_form), f(o.f), g(o.g),
      rhs_override(o.rhs_override), penalty(o.penalty), omega(o.omega), xhat_kind(o.xhat_kind),
      xhat_fixed(o.xhat_fixed), trial_gram(o.trial_gram), trial_mass(o.trial_mass),
      delta_truth(o.delta_truth), beta_truth(o.beta_truth), y_norm_constant(o.y_norm_constant),
      cache_(std::make_shared<RieszCache>(std::max<std::size_t>(1, o.samples.size()))) {}

SaddleProblem& SaddleProblem::operator=(const SaddleProblem& o) {
    if (this != &o) {
        SaddleProblem tmp(o);
        *this = std::move(tmp);
    }
    return *this;
}

SpMat SaddleProblem::operator_at(double mu) const { return op.at(mu); }

SpMat SaddleProblem::riesz_y_at(double mu) const { return riesz_y.at(mu); }

Vec SaddleProblem::rhs_at(double mu) const {
    if (rhs_override) return rhs_override(mu);
    return f.at(mu);
}

Vec SaddleProblem::g_at(double mu) const {
    if (g) return g->at(mu);
    return Vec::Zero(trial_dofs());
}

std::shared_ptr<const SparseSpdFactor> SaddleProblem::riesz_factor(double mu) const {
    const double key = y_norm_constant ? 0.0 : mu;
    return cache_->get(key, [this, mu] { return riesz_y_at(mu); });
}

Vec SaddleProblem::riesz_solve(double mu, const Vec& w) const { return riesz_factor(mu)->solve(w); }

Mat SaddleProblem::riesz_solve(double mu, const Mat& w) const { return riesz_factor(mu)->solve(w); }

void SaddleProblem::set_riesz_cache_capacity(std::size_t capacity) { cache_->set_capacity(capacity); }

std::size_t SaddleProblem::riesz_factorizations() const { return cache_->factorizations(); }

double SaddleProblem::y_norm(double mu, const Vec& v) const {
    return std::sqrt(std::max(0.0, v.dot(riesz_y.apply(mu, v))));
}

void SaddleProblem::validate() const {
    op.validate("operator");
    riesz_y.validate("riesz_y");
    if (riesz_y.rows() != op.rows() || riesz_y.cols() != op.rows())
        throw ShapeError("riesz_y does not match the test dimension");
    if (a_form) {
        a_form->validate("a_form");
        if (a_form->rows() != op.rows() || a_form->cols() != op.rows())
            throw ShapeError("a_form does not match the test dimension");
    }
    if (!rhs_override && f.size() != op.rows()) throw ShapeError("rhs does not match the test dimension");
    if (g && g->size() != op.cols()) throw ShapeError("g does not match the trial dimension");
    if (xhat_kind == XNormKind::fixed && (xhat_fixed.rows() != op.cols() || xhat_fixed.cols() != op.cols()))
        throw ShapeError("fixed X-norm Gramian does not match the trial dimension");
    if (trial_gram.rows() != op.cols()) throw ShapeError("trial Gramian does not match the trial dimension");
    if (!(delta_truth >= 0.0 && delta_truth < 1.0)) throw ConfigError("delta_truth", "must lie in [0, 1)");
    if (!(beta_truth > 0.0)) throw ConfigError("beta_truth", "must be positive");
    if (omega > 0.0 && (penalty.rows() != op.cols() || penalty.cols() != op.cols()))
        throw ShapeError("penalty does not match the trial dimension");
}

SpMat operator_at(const AffineOperator& op, double mu, const ParameterDomain& domain) {
    if (!domain.contains(mu)) throw DomainError("operator_at: parameter outside the domain");
    return op.at(mu);
}

namespace {

double cos_mu(double mu) { return std::cos(mu); }
double sin_mu(double mu) { return std::sin(mu); }
double one(double) { return 1.0; }

std::vector<double> filter_samples(const CoverPiece& piece, std::vector<double> samples) {
    std::vector<double> out;
    for (double s : samples)
        if (piece.contains(s)) out.push_back(s);
    if (out.empty()) throw ConfigError("sample_count", "no samples fall into the cover piece");
    return out;
}

}  // namespace

SaddleProblem build_cd_problem(const CdOptions& opts, const CoverPiece& piece, std::vector<double> samples) {
    if (!(opts.epsilon > 0.0)) throw ConfigError("epsilon", "diffusion must be positive");
    if (!(opts.omega > 0.0)) throw ConfigError("omega", "penalty weight must be positive");
    if (opts.test_level <= opts.trial_level)
        throw ConfigError("test_level", "test level must exceed the trial level");

    SaddleProblem p;
    p.kind = ProblemKind::convection_diffusion;
    p.name = "cd";
    p.piece = piece;
    p.samples = filter_samples(piece, std::move(samples));
    p.set_riesz_cache_capacity(1);

    const FESpace trial = build_space(opts.trial_level, Continuity::continuous, piece.inflow);
    const FESpace test = build_space(opts.test_level, Continuity::continuous,
                                     {Edge::left, Edge::right, Edge::bottom, Edge::top});
    p.trial_space = trial;
    p.test_space = test;

    const SpMat stiff = assemble(trial, test, {Kind::stiff});
    p.op.components = {opts.epsilon * stiff, assemble(trial, test, {Kind::conv_x}),
                       assemble(trial, test, {Kind::conv_y}), assemble(trial, test, {Kind::mass})};
    p.op.theta.fns = {one, cos_mu, sin_mu, one};

    const SpMat ry = opts.epsilon * assemble(test, test, {Kind::stiff}) + assemble(test, test, {Kind::mass});
    p.riesz_y.components = {ry};
    p.riesz_y.theta = ThetaMap::constant_one();
    p.y_norm_constant = true;

    p.f.components = {assemble_rhs(test, Source::constant(1.0))};
    p.f.theta = ThetaMap::constant_one();

    SpMat h(trial.dofs(), trial.dofs());
    for (Edge e : kAllEdges)
        if (piece.outflow.has(e)) h += assemble(trial, trial, ComponentKind::edge_mass(e));
    p.penalty = h / test.grid().h;
    p.omega = opts.omega;

    p.xhat_kind = XNormKind::graph;
    p.trial_mass = assemble(trial, trial, {Kind::mass});
    p.trial_gram = opts.epsilon * assemble(trial, trial, {Kind::stiff}) + p.trial_mass;
    p.delta_truth = opts.delta_truth;
    p.beta_truth = opts.beta_truth;
    p.validate();
    return p;
}

AffineOperator transport_test_gramian(const FESpace& test) {
    AffineOperator g;
    const SpMat cx = assemble(test, test, {Kind::conv_x});
    const SpMat ax = assemble(test, test, {Kind::adjconv_x});
    const SpMat cy = assemble(test, test, {Kind::conv_y});
    const SpMat ay = assemble(test, test, {Kind::adjconv_y});
    const SpMat dxdy = assemble(test, test, {Kind::dxdy});
    const SpMat dydx = assemble(test, test, {Kind::dydx});
    g.components = {assemble(test, test, {Kind::dxdx}),
                    SpMat(dxdy + dydx),
                    assemble(test, test, {Kind::dydy}),
                    SpMat(-(cx + ax)),
                    SpMat(-(cy + ay)),
                    assemble(test, test, {Kind::mass})};
    g.theta.fns = {[](double m) { return std::cos(m) * std::cos(m); },
                   [](double m) { return std::cos(m) * std::sin(m); },
                   [](double m) { return std::sin(m) * std::sin(m); },
                   cos_mu, sin_mu, one};
    return g;
}

SaddleProblem build_transport_problem(const TransportOptions& opts, const CoverPiece& piece,
                                      std::vector<double> samples) {
    if (opts.test_level <= opts.trial_level)
        throw ConfigError("test_level", "test level must exceed the trial level");
    if (piece.outflow.empty())
        throw ConfigError("outflow", "test space needs outflow constraints");

    SaddleProblem p;
    p.kind = ProblemKind::transport;
    p.name = opts.data == TransportData::smooth ? "transport" : "transport_jump";
    p.piece = piece;
    p.samples = filter_samples(piece, std::move(samples));
    p.set_riesz_cache_capacity(p.samples.size());

    const FESpace trial = build_space(opts.trial_level, Continuity::discontinuous, {});
    const FESpace test = build_space(opts.test_level, Continuity::continuous, piece.outflow);
    p.trial_space = trial;
    p.test_space = test;

    p.op.components = {SpMat(-assemble(trial, test, {Kind::adjconv_x})),
                       SpMat(-assemble(trial, test, {Kind::adjconv_y})),
                       assemble(trial, test, {Kind::mass})};
    p.op.theta.fns = {cos_mu, sin_mu, one};

    p.riesz_y = transport_test_gramian(test);
    p.y_norm_constant = false;

    if (opts.data == TransportData::smooth) {
        p.f.components = {assemble_rhs(test, Source::constant(1.0))};
        p.f.theta = ThetaMap::constant_one();
    } else {
        Source src;
        src.f = [](double x, double y) { return x < y ? 0.5 : 1.0; };
        src.cut = Source::Cut::diagonal;
        const ScalarField gb = [](double x, double y) { return x <= 0.5 ? 1.0 - y : 0.0; };
        const std::vector<double> breaks{0.5};
        p.f.components = {assemble_rhs(test, src)};
        p.f.theta.fns = {one};
        // Inflow term ∫_{Γ-} |n·μ| g ψ split per edge.
        if (piece.inflow.has(Edge::bottom)) {
            p.f.components.push_back(assemble_edge_load(test, Edge::bottom, gb, breaks));
            p.f.theta.fns.push_back(sin_mu);
        }
        if (piece.inflow.has(Edge::left)) {
            p.f.components.push_back(assemble_edge_load(test, Edge::left, gb, breaks));
            p.f.theta.fns.push_back(cos_mu);
        }
        if (piece.inflow.has(Edge::right)) {
            p.f.components.push_back(assemble_edge_load(test, Edge::right, gb, breaks));
            p.f.theta.fns.push_back([](double m) { return -std::cos(m); });
        }
    }

    p.xhat_kind = XNormKind::graph;
    p.trial_mass = assemble(trial, trial, {Kind::mass});
    p.xhat_fixed = p.trial_mass;
    p.trial_gram = p.trial_mass;
    p.delta_truth = opts.delta_truth;
    p.beta_truth = opts.beta_truth;
    p.validate();
    return p;
}

double truth_isometry_ratio(const SaddleProblem& problem, double mu) {
    const Mat b = Mat(problem.operator_at(mu));
    const Mat w = problem.riesz_solve(mu, b);
    Mat m = b.transpose() * w;
    Mat x;
    if (problem.xhat_kind == XNormKind::fixed) {
        x = Mat(problem.xhat_fixed);
    } else {
        x = m;
        if (problem.has_penalty()) x += problem.omega * Mat(problem.penalty);
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(symmetrize(m), symmetrize(x));
    if (es.info() != Eigen::Success) throw NumericalError("truth_isometry_ratio: eigen solve failed");
    return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

}  // namespace dgreedy
