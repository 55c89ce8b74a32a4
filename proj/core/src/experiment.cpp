#include "dgreedy/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "dgreedy/dg2.hpp"
#include "dgreedy/parallel.hpp"

namespace dgreedy {

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return format_double(x);
}

std::string json_num(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string json_str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (static_cast<unsigned char>(c) < 0x20) {
            out += ' ';
            continue;
        }
        out += c;
    }
    return out + "\"";
}

double parse_num(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DataError("table: bad number '" + s + "'");
    }
    if (used != s.size()) throw DataError("table: bad number '" + s + "'");
    return x;
}


SaddleProblem build_piece_problem(const ExperimentConfig& cfg, const CoverPiece& piece,
                                  std::vector<double> samples) {
    if (cfg.problem == ProblemChoice::cd) {
        CdOptions o;
        o.epsilon = cfg.epsilon;
        o.omega = cfg.omega;
        o.trial_level = cfg.trial_level;
        o.test_level = cfg.test_level;
        return build_cd_problem(o, piece, std::move(samples));
    }
    TransportOptions o;
    o.trial_level = cfg.trial_level;
    o.test_level = cfg.test_level;
    o.data = cfg.problem == ProblemChoice::transport_jump ? TransportData::jump : TransportData::smooth;
    return build_transport_problem(o, piece, std::move(samples));
}

TableRow make_row(int piece, int cycle, const IterationRecord& rec, bool a_post) {
    TableRow row;
    row.piece = piece;
    row.cycle = cycle;
    row.trial = rec.n;
    row.test = static_cast<long>(rec.m);
    row.delta = rec.delta;
    row.max_surrogate = rec.max_surrogate;
    if (rec.summary) {
        row.rb_truth = rec.summary->max_rb_truth;
        row.rb_l2 = rec.summary->max_rb_l2;
        if (a_post) {
            const double t = rec.summary->max_truth_bound;
            row.ratio = t > 0.0 ? rec.max_surrogate / t : std::nan("");
        } else {
            row.ratio = rec.summary->top_ratio;
        }
    }
    row.ratio_kind = a_post ? "surr/a-post" : "surr/err";
    return row;
}

void append_report(SurrogateReport& into, const SurrogateReport& r) {
    auto cat = [](std::vector<double>& a, const std::vector<double>& b) { a.insert(a.end(), b.begin(), b.end()); };
    cat(into.mu, r.mu);
    cat(into.surrogate, r.surrogate);
    cat(into.rb_truth, r.rb_truth);
    cat(into.rb_l2, r.rb_l2);
    cat(into.ratio, r.ratio);
    cat(into.truth_bound, r.truth_bound);
}

PieceRun run_synthetic(const ExperimentConfig& cfg, GreedyConfig gc) {
    SyntheticOptions so;
    so.samples = cfg.sample_count;
    so.seed = cfg.seed;
    const SaddleProblem problem = build_synthetic_problem(so);
    gc.stab.beta = problem.beta_truth;
    const TruthSnapshots truth(problem);
    Dg2Result r = dg2(problem, gc, &truth);

    PieceRun run;
    run.cover = problem.piece;
    run.samples = problem.samples.size();
    run.selected = r.selected;
    TighteningCycle c;
    c.stop_tol = gc.tol;
    c.report = evaluate_report(problem, *r.pair, gc.surrogate, truth);
    const ResidualStar rstar(problem);
    for (std::size_t i = 0; i < problem.samples.size(); ++i) {
        const double mu = problem.samples[i];
        const SaddleSolution red = solve_reduced(problem, mu, *r.pair);
        c.report.surrogate[i] = rstar(mu, lift_test(*r.pair, red.u), lift_trial(*r.pair, red.p));
        c.report.ratio[i] = c.report.rb_truth[i] > 1e-14 ? c.report.surrogate[i] / c.report.rb_truth[i] : std::nan("");
    }
    c.history = std::move(r.history);
    run.cycles.push_back(std::move(c));
    return run;
}

PieceRun run_piece(const ExperimentConfig& cfg, const GreedyConfig& base, const CoverPiece& cover,
                   std::vector<double> samples) {
    const SaddleProblem problem = build_piece_problem(cfg, cover, std::move(samples));
    GreedyConfig gc = base;
    gc.stab.beta = problem.beta_truth;
    const TruthSnapshots truth(problem);

    PieceRun run;
    run.cover = cover;
    run.samples = problem.samples.size();
    if (gc.tightening.cycles > 0) {
        TighteningResult t = iterative_tightening(problem, gc, truth);
        run.cycles = std::move(t.cycles);
    } else {
        GreedyResult r = dg1(problem, gc, &truth);
        TighteningCycle c;
        c.stop_tol = gc.tol;
        c.report = evaluate_report(problem, *r.pair, gc.surrogate, truth);
        c.history = std::move(r.history);
        run.cycles.push_back(std::move(c));
    }
    for (const auto& rec : run.cycles.back().history.records) run.selected.push_back(rec.selected_mu);
    return run;
}

}  // namespace

bool TableRow::operator==(const TableRow& o) const {
    return piece == o.piece && cycle == o.cycle && trial == o.trial && test == o.test && same(delta, o.delta) &&
           same(max_surrogate, o.max_surrogate) && same(rb_truth, o.rb_truth) && same(rb_l2, o.rb_l2) &&
           same(ratio, o.ratio) && ratio_kind == o.ratio_kind;
}

std::string ReportTable::to_csv() const {
    std::ostringstream out;
    out << kTableHeader << "\n";
    for (const auto& r : rows)
        out << r.piece << ',' << r.cycle << ',' << r.trial << ',' << r.test << ',' << num(r.delta) << ','
            << num(r.max_surrogate) << ',' << num(r.rb_truth) << ',' << num(r.rb_l2) << ',' << num(r.ratio) << ','
            << r.ratio_kind << "\n";
    return out.str();
}

ReportTable ReportTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTableHeader) throw DataError("table: header mismatch");
    ReportTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 10) throw DataError("table: expected 10 fields in '" + line + "'");
        TableRow r;
        r.piece = static_cast<int>(parse_num(f[0]));
        r.cycle = static_cast<int>(parse_num(f[1]));
        r.trial = static_cast<long>(parse_num(f[2]));
        r.test = static_cast<long>(parse_num(f[3]));
        r.delta = parse_num(f[4]);
        r.max_surrogate = parse_num(f[5]);
        r.rb_truth = parse_num(f[6]);
        r.rb_l2 = parse_num(f[7]);
        r.ratio = parse_num(f[8]);
        r.ratio_kind = f[9];
        t.rows.push_back(std::move(r));
    }
    return t;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.threads > 0) set_thread_count(static_cast<unsigned>(cfg.threads));
    GreedyConfig gc = greedy_config(cfg);
    gc.report_each_iteration = true;
    gc.validate();
    if (gc.tightening.cycles > 0 && gc.surrogate != SurrogateKind::reduced_dual)
        throw ConfigError("cycles", "iterative tightening needs the reduced_dual surrogate");

    ExperimentResult res;
    res.config = cfg;
    const bool a_post = cfg.problem == ProblemChoice::cd;

    auto wrap = [](const std::string& where, auto&& fn) {
        try {
            return fn();
        } catch (const StabilizationStalled& e) {
            throw StabilizationStalled(e.mu(), e.value(), where + ": " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError(where + ": " + e.what());
        }
    };

    if (cfg.problem == ProblemChoice::synthetic_saddle) {
        res.pieces.push_back(wrap("synthetic_saddle", [&] { return run_synthetic(cfg, gc); }));
    } else {
        ParameterDomain dom;
        dom.lo = cfg.interval_lo;
        dom.hi = cfg.interval_hi;
        dom.samples = cfg.sample_count;
        const auto pieces = cover_pieces(dom);
        const auto points = dom.sample_points();
        bool any = false;
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            const int index = pieces[k].lo < kSplitAngle || (pieces[k].lo == kSplitAngle && !pieces[k].open_lo) ? 0 : 1;
            if (cfg.piece && *cfg.piece != index) continue;
            std::vector<double> s;
            for (double mu : points)
                if (pieces[k].contains(mu)) s.push_back(mu);
            if (s.empty()) throw ConfigError("sample_count", "cover piece " + std::to_string(index) + " has no samples");
            any = true;
            const std::string where = to_string(cfg.problem) + " piece " + std::to_string(index);
            PieceRun run = wrap(where, [&] { return run_piece(cfg, gc, pieces[k], s); });
            run.piece = index;
            res.pieces.push_back(std::move(run));
        }
        if (!any) throw ConfigError("piece", "no cover piece matches the parameter interval");
    }

    for (const auto& run : res.pieces) {
        for (const auto& c : run.cycles)
            for (const auto& rec : c.history.records) res.table.rows.push_back(make_row(run.piece, c.cycle, rec, a_post));
        append_report(res.report, run.cycles.back().report);
    }
    return res;
}

std::string history_json(const ExperimentResult& result) {
    std::ostringstream o;
    const ExperimentConfig& c = result.config;
    o << "{\n  \"schema\": " << kTableSchemaVersion << ",\n";
    o << "  \"table_header\": " << json_str(kTableHeader) << ",\n";
    o << "  \"config\": {\"problem\": " << json_str(to_string(c.problem)) << ", \"epsilon\": " << json_num(c.epsilon)
      << ", \"omega\": " << json_num(c.omega) << ", \"trial_level\": " << c.trial_level
      << ", \"test_level\": " << c.test_level << ", \"sample_count\": " << c.sample_count
      << ", \"parameter_interval\": [" << json_num(c.interval_lo) << ", " << json_num(c.interval_hi) << "]"
      << ", \"zeta\": " << json_num(c.zeta) << ", \"delta\": " << json_num(c.delta) << ", \"tol\": " << json_num(c.tol)
      << ", \"n_max\": " << c.n_max << ", \"cycles\": " << c.cycles << ", \"seed\": " << c.seed << "},\n";
    o << "  \"pieces\": [";
    for (std::size_t pi = 0; pi < result.pieces.size(); ++pi) {
        const PieceRun& run = result.pieces[pi];
        o << (pi ? ",\n" : "\n") << "    {\"piece\": " << run.piece << ", \"lo\": " << json_num(run.cover.lo)
          << ", \"hi\": " << json_num(run.cover.hi) << ", \"samples\": " << run.samples << ", \"selected\": [";
        for (std::size_t i = 0; i < run.selected.size(); ++i) o << (i ? ", " : "") << json_num(run.selected[i]);
        o << "],\n     \"cycles\": [";
        for (std::size_t ci = 0; ci < run.cycles.size(); ++ci) {
            const TighteningCycle& cyc = run.cycles[ci];
            o << (ci ? ",\n" : "\n") << "      {\"cycle\": " << cyc.cycle << ", \"anchor_dim\": " << cyc.anchor_dim
              << ", \"stop_tol\": " << json_num(cyc.stop_tol)
              << ", \"stop_reason\": " << json_str(cyc.history.stop_reason) << ", \"records\": [";
            const auto& recs = cyc.history.records;
            for (std::size_t ri = 0; ri < recs.size(); ++ri) {
                const IterationRecord& r = recs[ri];
                o << (ri ? ",\n" : "\n") << "        {\"n\": " << r.n << ", \"m\": " << r.m
                  << ", \"delta\": " << json_num(r.delta) << ", \"sigma_min\": " << json_num(r.sigma_min)
                  << ", \"max_surrogate\": " << json_num(r.max_surrogate)
                  << ", \"argmax_mu\": " << json_num(r.argmax_mu) << ", \"best_error\": " << json_num(r.best_error)
                  << ", \"selected_mu\": " << json_num(r.selected_mu) << ", \"enrichment_mus\": [";
                for (std::size_t i = 0; i < r.enrichment_mus.size(); ++i)
                    o << (i ? ", " : "") << json_num(r.enrichment_mus[i]);
                o << "]}";
            }
            o << "]}";
        }
        o << "]}";
    }
    o << "\n  ]\n}\n";
    return o.str();
}

std::string decay_csv(const ExperimentResult& result) {
    std::ostringstream o;
    o << kDecayHeader << "\n";
    for (const auto& run : result.pieces)
        for (const auto& c : run.cycles)
            for (const auto& r : c.history.records)
                o << run.piece << ',' << c.cycle << ',' << r.n << ',' << num(r.max_surrogate) << ','
                  << num(r.best_error) << "\n";
    return o.str();
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    auto write = [](const std::filesystem::path& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + path.string() + " for writing");
        out << body;
        out.flush();
        if (!out) throw DataError("write failed for " + path.string());
    };
    write(dir / "table.csv", result.table.to_csv());
    write(dir / "history.json", history_json(result));
    write(dir / "decay.csv", decay_csv(result));
}

namespace {

template <class F>
VerifyCheck check(const std::string& name, F&& fn) {
    VerifyCheck c;
    c.name = name;
    try {
        std::tie(c.passed, c.detail) = fn();
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail = std::string("exception: ") + e.what();
    }
    return c;
}

std::string sci(double x) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << x;
    return s.str();
}

}  // namespace

std::vector<VerifyCheck> run_verify() {
    std::vector<VerifyCheck> out;

    out.push_back(check("config round trip", [] {
        ExperimentConfig c;
        c.problem = ProblemChoice::transport_jump;
        c.epsilon = 0.1 / 3.0;
        c.interval_lo = 0.3;
        c.piece = 1;
        const bool ok = parse_config_text(serialize_config(c)) == c;
        return std::pair{ok, std::string(ok ? "" : "reparsed config differs")};
    }));

    ParameterDomain dom;
    dom.samples = 12;
    const auto pieces = cover_pieces(dom);
    std::vector<double> left;
    for (double mu : dom.sample_points())
        if (pieces[0].contains(mu)) left.push_back(mu);

    TransportOptions to;
    to.trial_level = 2;
    to.test_level = 3;
    const SaddleProblem tp = build_transport_problem(to, pieces[0], left);
    GreedyConfig tg;
    tg.surrogate = SurrogateKind::reduced_dual;
    tg.loop = StabLoop::delta;
    tg.n_max = 3;
    tg.tol = 1e-12;
    const TruthSnapshots ttruth(tp);
    const GreedyResult tr = dg1(tp, tg, &ttruth);

    out.push_back(check("duality sigma^2 + delta^2 = 1", [&] {
        double worst = 0.0;
        for (double mu : tp.samples) {
            const double s = inf_sup_constant(tp, mu, *tr.pair).sigma;
            const double d = delta_rayleigh(tp, mu, *tr.pair).delta2;
            worst = std::max(worst, std::abs(s * s + d - 1.0));
        }
        return std::pair{worst <= 1e-8, "max deviation " + sci(worst)};
    }));

    out.push_back(check("snapshot reproduction", [&] {
        double worst = 0.0;
        for (const auto& rec : tr.history.records) {
            const SaddleSolution red = solve_reduced(tp, rec.selected_mu, *tr.pair);
            const Vec e = lift_trial(*tr.pair, red.p) - ttruth.at_mu(rec.selected_mu).p;
            worst = std::max(worst, std::sqrt(std::max(0.0, e.dot(tp.trial_mass * e))));
        }
        return std::pair{worst <= 1e-7, "max error " + sci(worst)};
    }));

    CdOptions co;
    co.trial_level = 3;
    co.test_level = 4;
    const SaddleProblem cp = build_cd_problem(co, pieces[0], left);
    GreedyConfig cg;
    cg.n_max = 3;
    cg.tol = 1e-12;
    const TruthSnapshots ctruth(cp);
    const GreedyResult cr = dg1(cp, cg, &ctruth);

    out.push_back(check("test dimension m(n) <= 3n", [&] {
        bool ok = true;
        std::string d;
        for (const auto& rec : cr.history.records) {
            ok = ok && rec.m <= 3 * rec.n;
            d += std::to_string(rec.n) + ":" + std::to_string(rec.m) + " ";
        }
        return std::pair{ok, d};
    }));

    out.push_back(check("first-block identity", [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < cp.samples.size(); ++i) {
            const double mu = cp.samples[i];
            const SaddleSolution& t = ctruth.at(i);
            worst = std::max(worst, std::abs(surrogate_truth_dual(cp, mu, t.p) - cp.y_norm(mu, t.u)));
        }
        return std::pair{worst <= 1e-9, "max deviation " + sci(worst)};
    }));

    out.push_back(check("online Petrov-Galerkin = reduced saddle", [&] {
        const OnlineTestBasis otb = build_online_test_basis(cp, *cr.pair);
        double worst = 0.0;
        for (double mu : cp.samples) {
            const Vec a = online_pg_solve(cp, mu, *cr.pair, otb);
            const Vec b = solve_reduced(cp, mu, *cr.pair).p;
            worst = std::max(worst, (a - b).norm() / std::max(1.0, b.norm()));
        }
        return std::pair{worst <= 1e-9, "max deviation " + sci(worst)};
    }));

    return out;
}

}  // namespace dgreedy
