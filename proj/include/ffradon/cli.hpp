#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffradon/report.hpp"
#include "ffradon/verifier.hpp"

namespace ffradon {

struct RunConfig {
    std::string cmd;
    std::vector<std::uint32_t> q_list;
    int d = 2;
    int k = 1;
    std::string p_str, r_str;
    bool vertex = false;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    int threads = 0; // 0: --threads absent, fall back to env / hardware
    std::string out_path;
    std::string format = "json-lines";
    std::uint64_t max_q_cap = 1024;
    std::uint64_t max_points_cap = std::uint64_t{1} << 24;
    std::uint64_t subset_budget = std::uint64_t{1} << 20;
    std::uint64_t tuple_budget = 100000000;
    bool timings = false;
    double spread_limit = 1.25;
    int grid = 21;
    std::string indicator;
    std::string values;
    std::string function_file;
    std::string set_literal;
    std::uint64_t mc_samples = 0;
    int max_set_size = 5;

    int effective_threads() const { return threads > 0 ? threads : default_thread_count(); }

    SizeCaps caps() const {
        SizeCaps c;
        c.max_q = max_q_cap;
        c.max_points = max_points_cap;
        return c;
    }

    // thread count, output path and timing emission do not change results,
    // so they stay out of the hash
    std::string canonical() const {
        std::ostringstream os;
        os << "cmd=" << cmd << ";q=";
        for (std::size_t i = 0; i < q_list.size(); ++i) os << (i ? "," : "") << q_list[i];
        os << ";d=" << d << ";k=" << k << ";p=" << p_str << ";r=" << r_str
           << ";vertex=" << vertex << ";trials=" << trials << ";seed=" << seed
           << ";format=" << format << ";max_q=" << max_q_cap << ";max_points=" << max_points_cap
           << ";subset_budget=" << subset_budget << ";tuple_budget=" << tuple_budget
           << ";spread_limit=" << spread_limit << ";grid=" << grid
           << ";indicator=" << indicator << ";values=" << values << ";file=" << function_file
           << ";set=" << set_literal << ";mc=" << mc_samples << ";max_set=" << max_set_size;
        return os.str();
    }
};

namespace cli_detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::uint32_t parse_point(const FieldCtx& F, int d, const std::string& literal,
                                 int line_no) {
    auto parts = split(trim(literal), ',');
    if (static_cast<int>(parts.size()) != d)
        raise(Errc::ParseError, "line " + std::to_string(line_no) + ": point '" + literal +
                                    "' needs " + std::to_string(d) + " coordinates");
    Point pt;
    pt.coords.reserve(d);
    for (const auto& piece : parts) {
        const std::string t = trim(piece);
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
            raise(Errc::ParseError,
                  "line " + std::to_string(line_no) + ": malformed point literal '" + literal +
                      "'");
        unsigned long v = std::stoul(t);
        if (v >= F.q())
            raise(Errc::ParseError, "line " + std::to_string(line_no) + ": coordinate " + t +
                                        " is not below q = " + std::to_string(F.q()));
        pt.coords.push_back(static_cast<Elem>(v));
    }
    return static_cast<std::uint32_t>(point_rank(F, pt));
}

inline std::vector<std::uint32_t> parse_point_list(const FieldCtx& F, int d,
                                                   const std::string& literal) {
    std::vector<std::uint32_t> out;
    int line_no = 1;
    for (const auto& item : split(literal, ';')) {
        if (trim(item).empty()) {
            ++line_no;
            continue;
        }
        out.push_back(parse_point(F, d, item, line_no));
        ++line_no;
    }
    if (out.empty()) raise(Errc::ParseError, "empty point list");
    return out;
}

inline GridFunction parse_function(const RunConfig& cfg, std::shared_ptr<const FieldCtx> ctx) {
    const FieldCtx& F = *ctx;
    if (!cfg.indicator.empty())
        return grid_indicator(ctx, cfg.d, parse_point_list(F, cfg.d, cfg.indicator));

    auto parse_entries = [&](const std::vector<std::string>& lines) {
        GridFunction f = grid_constant(ctx, cfg.d, 0.0);
        int line_no = 0;
        bool any = false;
        for (const auto& raw : lines) {
            ++line_no;
            std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            std::string pt = line;
            double value = 1.0;
            auto colon = line.rfind(':');
            if (colon != std::string::npos) {
                pt = line.substr(0, colon);
                std::string vs = trim(line.substr(colon + 1));
                try {
                    std::size_t used = 0;
                    value = std::stod(vs, &used);
                    if (used != vs.size()) throw std::invalid_argument(vs);
                } catch (const std::exception&) {
                    raise(Errc::ParseError,
                          "line " + std::to_string(line_no) + ": bad value '" + vs + "'");
                }
            }
            f.values[parse_point(F, cfg.d, pt, line_no)] = value;
            any = true;
        }
        if (!any) raise(Errc::ParseError, "no function entries given");
        return f;
    };

    if (!cfg.values.empty()) return parse_entries(split(cfg.values, ';'));
    if (!cfg.function_file.empty()) {
        std::ifstream in(cfg.function_file);
        if (!in) raise(Errc::BadConfig, "cannot open " + cfg.function_file);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        return parse_entries(lines);
    }
    raise(Errc::BadConfig, "transform needs --indicator, --values or --function-file");
}

inline std::string flat_descriptor(const Flat& flat) {
    std::string s = "base=(";
    for (std::size_t i = 0; i < flat.basepoint.coords.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(flat.basepoint.coords[i]);
    }
    s += ");dirs=[";
    for (std::size_t r = 0; r < flat.directions.size(); ++r) {
        if (r) s += ",";
        s += "(";
        for (std::size_t i = 0; i < flat.directions[r].size(); ++i) {
            if (i) s += ",";
            s += std::to_string(flat.directions[r][i]);
        }
        s += ")";
    }
    s += "]";
    return s;
}

struct ResolvedExponents {
    Exponent p = Exponent::from_int(1);
    Exponent r = Exponent::from_int(1);
};

inline ResolvedExponents resolve_exponents(const RunConfig& cfg) {
    ResolvedExponents e;
    if (cfg.vertex || (cfg.p_str.empty() && cfg.r_str.empty())) {
        e.p = vertex_p(cfg.d, cfg.k);
        e.r = vertex_r(cfg.d);
        return e;
    }
    if (cfg.p_str.empty() || cfg.r_str.empty())
        raise(Errc::BadConfig, "give both --p and --r, or --vertex");
    e.p = Exponent::parse(cfg.p_str);
    e.r = Exponent::parse(cfg.r_str);
    return e;
}

inline double elapsed_for_row(const RunConfig& cfg, double measured_ms) {
    return cfg.timings ? measured_ms : 0.0;
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------

inline int cmd_transform(const RunConfig& cfg, FamilyCache& cache, ReportSink& sink) {
    if (cfg.q_list.size() != 1) raise(Errc::BadConfig, "transform takes a single --q");
    Timer timer;
    const std::uint32_t q = cfg.q_list[0];
    auto fam = cache.family(q, cfg.d, cfg.k);
    GridFunction f = parse_function(cfg, fam->ctx());
    PlaneFunction tf = kplane_transform(f, fam);
    for (std::size_t w = 0; w < tf.values.size(); ++w) {
        ReportRow row;
        row.cmd = "transform";
        row.q = q;
        row.d = cfg.d;
        row.k = cfg.k;
        row.p = "-";
        row.r = "-";
        row.method = "transform";
        row.value = tf.values[w].real();
        row.witness = flat_descriptor(fam->flats()[w]);
        row.exhaustive = true;
        row.seed = cfg.seed;
        row.elapsed_ms = elapsed_for_row(cfg, timer.ms());
        sink.add(std::move(row));
    }
    return 0;
}

inline int cmd_scan(const RunConfig& cfg, FamilyCache& cache, ReportSink& sink) {
    if (cfg.q_list.empty()) raise(Errc::BadConfig, "scan needs --q");
    auto [p, r] = resolve_exponents(cfg);
    ScanOptions opt;
    opt.trials = cfg.trials;
    opt.seed = cfg.seed;
    opt.subset_budget = cfg.subset_budget;
    opt.threads = cfg.effective_threads();
    std::vector<RatioReport> reports = theorem_scan(cache, cfg.q_list, cfg.d, cfg.k, p, r, opt);
    for (const auto& rep : reports) {
        ReportRow row;
        row.cmd = "scan";
        row.q = rep.q;
        row.d = rep.d;
        row.k = rep.k;
        row.p = rep.p.str();
        row.r = rep.r.str();
        row.method = rep.method;
        row.value = rep.value;
        row.witness = rep.witness + (rep.converged ? "" : ";no-convergence");
        row.exhaustive = rep.exhaustive;
        row.seed = rep.seed;
        row.elapsed_ms = elapsed_for_row(cfg, rep.elapsed_ms);
        sink.add(std::move(row));
    }
    ScanVerdict verdict = summarize_scan(reports);
    bool pass = verdict.lower_ok && verdict.spread <= cfg.spread_limit;
    ReportRow summary;
    summary.cmd = "scan";
    summary.q = 0;
    summary.d = cfg.d;
    summary.k = cfg.k;
    summary.p = p.str();
    summary.r = r.str();
    summary.method = "spread";
    summary.value = verdict.spread;
    {
        std::ostringstream os;
        os << "limit=" << format_double(cfg.spread_limit) << ";lower_ok=" << verdict.lower_ok
           << ";pass=" << pass;
        summary.witness = os.str();
    }
    summary.exhaustive = false;
    summary.seed = cfg.seed;
    summary.elapsed_ms = 0;
    sink.add(std::move(summary));
    return pass ? 0 : 1;
}

inline int cmd_sharpness(const RunConfig& cfg, FamilyCache& cache, ReportSink& sink) {
    if (cfg.q_list.size() < 3) raise(Errc::TooFewPoints, "sharpness needs at least 3 --q values");
    if (cfg.grid < 2) raise(Errc::BadConfig, "--grid must be at least 2");
    const int g = cfg.grid;
    const int denom = g - 1;
    const std::array<WitnessKind, 3> kinds = {WitnessKind::Delta, WitnessKind::KFlat,
                                              WitnessKind::Constant};
    for (WitnessKind kind : kinds)
        for (std::uint32_t q : cfg.q_list) cache.witness(kind, q, cfg.d, cfg.k);

    struct Cell {
        HullPosition pos;
        std::array<ExponentFit, 3> fits;
        double closed_delta = 0;
        bool outside_miss = false;  // outside but no witness certifies growth
        bool inside_excess = false; // inside/boundary but a witness drifts upward
        bool delta_mismatch = false;
        double measured_ms = 0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(g) * g);
    parallel_for(cells.size(), cfg.effective_threads(), [&](std::size_t idx) {
        Timer timer;
        int i = static_cast<int>(idx) % g; // u index
        int j = static_cast<int>(idx) / g; // v index
        Rational u(i, denom), v(j, denom);
        Cell& cell = cells[idx];
        cell.pos = hull_contains(cfg.d, cfg.k, u, v);
        Exponent p = i == 0 ? Exponent::infinity() : Exponent::from_rational(denom, i);
        Exponent r = j == 0 ? Exponent::infinity() : Exponent::from_rational(denom, j);
        for (std::size_t kk = 0; kk < kinds.size(); ++kk)
            cell.fits[kk] = exponent_fit(cache, kinds[kk], cfg.d, cfg.k, p, r, cfg.q_list);
        cell.closed_delta = cfg.d * u.to_double() - cfg.k - (cfg.d - cfg.k) * v.to_double();
        double max_alpha = std::max({cell.fits[0].alpha, cell.fits[1].alpha, cell.fits[2].alpha});
        // float grace: grid points can sit exactly on a threshold
        if (cell.pos == HullPosition::Outside)
            cell.outside_miss = max_alpha < 0.05 - 1e-9;
        else
            cell.inside_excess = max_alpha > 0.01 + 1e-9;
        cell.delta_mismatch = std::abs(cell.fits[0].alpha - cell.closed_delta) > 0.01;
        cell.measured_ms = timer.ms();
    });

    std::uint64_t outside_misses = 0, inside_excesses = 0, delta_mismatches = 0;
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        const Cell& cell = cells[idx];
        int i = static_cast<int>(idx) % g;
        int j = static_cast<int>(idx) / g;
        outside_misses += cell.outside_miss;
        inside_excesses += cell.inside_excess;
        delta_mismatches += cell.delta_mismatch;
        const char* pos_name = cell.pos == HullPosition::Interior
                                   ? "interior"
                                   : (cell.pos == HullPosition::Boundary ? "boundary" : "outside");
        for (std::size_t kk = 0; kk < kinds.size(); ++kk) {
            ReportRow row;
            row.cmd = "sharpness";
            row.q = 0;
            row.d = cfg.d;
            row.k = cfg.k;
            row.p = i == 0 ? "inf" : Rational(denom, i).str();
            row.r = j == 0 ? "inf" : Rational(denom, j).str();
            row.method = witness_name(kinds[kk]);
            row.value = cell.fits[kk].alpha;
            std::ostringstream os;
            os << "u=" << Rational(i, denom).str() << ";v=" << Rational(j, denom).str()
               << ";hull=" << pos_name << ";residual=" << format_double(cell.fits[kk].residual);
            if (kinds[kk] == WitnessKind::Delta)
                os << ";closed=" << format_double(cell.closed_delta);
            row.witness = os.str();
            row.exhaustive = false;
            row.seed = cfg.seed;
            row.elapsed_ms = elapsed_for_row(cfg, cell.measured_ms);
            sink.add(std::move(row));
        }
    }
    std::uint64_t violations = outside_misses + inside_excesses + delta_mismatches;
    ReportRow summary;
    summary.cmd = "sharpness";
    summary.q = 0;
    summary.d = cfg.d;
    summary.k = cfg.k;
    summary.p = "-";
    summary.r = "-";
    summary.method = "coherence";
    summary.value = static_cast<double>(violations);
    {
        std::ostringstream os;
        os << "outside_misses=" << outside_misses << ";inside_excesses=" << inside_excesses
           << ";delta_closed_mismatches=" << delta_mismatches;
        summary.witness = os.str();
    }
    summary.exhaustive = true;
    summary.seed = cfg.seed;
    summary.elapsed_ms = 0;
    sink.add(std::move(summary));
    return violations == 0 ? 0 : 1;
}

inline int cmd_lemmas(const RunConfig& cfg, FamilyCache& cache, ReportSink& sink) {
    if (cfg.q_list.empty()) raise(Errc::BadConfig, "lemmas needs --q");
    bool all_ok = true;
    for (std::uint32_t q : cfg.q_list) {
        auto fam = cache.family(q, cfg.d, cfg.d - 1);
        const std::uint64_t n = fam->num_points();

        std::vector<std::vector<std::uint32_t>> sets;
        if (!cfg.set_literal.empty()) {
            sets.push_back(parse_point_list(fam->field(), cfg.d, cfg.set_literal));
        } else {
            sets.resize(cfg.trials);
            for (std::uint64_t t = 0; t < cfg.trials; ++t) {
                Rng rng(derive_seed(cfg.seed, {q, 0x1e33a5u, t}));
                for (std::uint32_t x = 0; x < n; ++x)
                    if (rng.coin()) sets[t].push_back(x);
                if (sets[t].empty())
                    sets[t].push_back(static_cast<std::uint32_t>(rng.below(n)));
            }
        }

        std::vector<LemmaReport> reports(sets.size());
        std::vector<double> times(sets.size(), 0.0);
        parallel_for(sets.size(), cfg.effective_threads(), [&](std::size_t t) {
            Timer timer;
            reports[t] = lemma_suite(cache, q, cfg.d, sets[t]);
            times[t] = timer.ms();
        });

        for (std::size_t t = 0; t < reports.size(); ++t) {
            const LemmaReport& rep = reports[t];
            double margin = std::min({rep.sup_bound - rep.t0dd_sup, rep.sup_bound - rep.t1dd_sup,
                                      rep.l2sq_bound - rep.t0dd_l2 * rep.t0dd_l2,
                                      rep.l2sq_bound - rep.t1dd_l2 * rep.t1dd_l2, -rep.ii_term,
                                      rep.i_term - rep.t1dd_l2 * rep.t1dd_l2});
            all_ok = all_ok && rep.all_ok();
            ReportRow row;
            row.cmd = "lemmas";
            row.q = q;
            row.d = cfg.d;
            row.k = cfg.d - 1;
            row.p = "-";
            row.r = "-";
            row.method = "lemma";
            row.value = margin;
            std::ostringstream os;
            os << "|E|=" << rep.set_size << ";trial=" << t << ";pass=" << rep.all_ok()
               << ";t1dd_l2sq=" << format_double(rep.t1dd_l2 * rep.t1dd_l2)
               << ";I=" << format_double(rep.i_term) << ";II=" << format_double(rep.ii_term);
            if (!rep.all_ok()) os << ";" << detail::set_descriptor(sets[t]);
            row.witness = os.str();
            row.exhaustive = true;
            row.seed = cfg.seed;
            row.elapsed_ms = elapsed_for_row(cfg, times[t]);
            sink.add(std::move(row));
        }
    }
    return all_ok ? 0 : 1;
}

inline int cmd_incidence(const RunConfig& cfg, FamilyCache& cache, ReportSink& sink) {
    if (cfg.q_list.empty()) raise(Errc::BadConfig, "incidence needs --q");
    bool all_ok = true;
    for (std::uint32_t q : cfg.q_list) {
        auto ctx = cache.field(q);
        const FieldCtx& F = *ctx;
        const std::uint64_t n = grid_size(F, cfg.d);

        struct Item {
            std::vector<std::vector<std::uint32_t>> sets;
            bool ok = true;
            std::string note;
            double mc_value = 0, mc_stderr = 0;
            std::uint64_t exact_delta1 = 0;
            double measured_ms = 0;
        };
        std::vector<Item> items(cfg.trials);
        parallel_for(items.size(), cfg.effective_threads(), [&](std::size_t t) {
            Timer timer;
            Item& item = items[t];
            Rng rng(derive_seed(cfg.seed, {q, 0xde17a0u, t}));
            item.sets.resize(cfg.d + 1);
            for (auto& set : item.sets) {
                std::uint64_t size = 1 + rng.below(static_cast<std::uint64_t>(cfg.max_set_size));
                size = std::min<std::uint64_t>(size, n);
                while (set.size() < size) {
                    std::uint32_t r = static_cast<std::uint32_t>(rng.below(n));
                    if (std::find(set.begin(), set.end(), r) == set.end()) set.push_back(r);
                }
                std::sort(set.begin(), set.end());
            }
            auto profile = delta_incidence_profile(F, cfg.d, item.sets, cfg.tuple_budget);
            auto lprofile = l_class_profile(F, cfg.d, item.sets, cfg.tuple_budget);

            std::uint64_t product = 1;
            for (const auto& set : item.sets) product *= set.size();
            std::uint64_t total = 0;
            for (auto c : profile) total += c;
            std::uint64_t lsum = 0;
            for (auto c : lprofile) lsum += c;

            std::ostringstream note;
            if (total != product) {
                item.ok = false;
                note << "partition:" << total << "!=" << product << ";";
            }
            if (profile[0] > item.sets[0].size()) {
                item.ok = false;
                note << "delta0>" << item.sets[0].size() << ";";
            }
            if (lsum != profile[1]) {
                item.ok = false;
                note << "lclasses:" << lsum << "!=" << profile[1] << ";";
            }
            for (int l = 1; l <= cfg.d; ++l) {
                std::uint64_t bound = item.sets[0].size() * item.sets[l].size();
                for (int i = 0; i < cfg.d - l; ++i) bound *= F.q();
                if (lprofile[l] > bound) {
                    item.ok = false;
                    note << "L(" << l << ")=" << lprofile[l] << ">" << bound << ";";
                }
            }
            item.exact_delta1 = profile[1];
            item.note = note.str();
            if (cfg.mc_samples > 0) {
                MonteCarlo mc;
                mc.samples = cfg.mc_samples;
                mc.seed = derive_seed(cfg.seed, {q, 0x3cu, t});
                auto est = delta_incidence_count(F, cfg.d, 1, item.sets, mc);
                item.mc_value = est.value;
                item.mc_stderr = est.stderr_;
            }
            item.measured_ms = timer.ms();
        });

        for (std::size_t t = 0; t < items.size(); ++t) {
            const Item& item = items[t];
            all_ok = all_ok && item.ok;
            ReportRow row;
            row.cmd = "incidence";
            row.q = q;
            row.d = cfg.d;
            row.k = cfg.k;
            row.p = "-";
            row.r = "-";
            row.method = "incidence";
            row.value = item.ok ? 1.0 : 0.0;
            std::ostringstream os;
            os << "sizes=";
            for (std::size_t i = 0; i < item.sets.size(); ++i)
                os << (i ? "," : "") << item.sets[i].size();
            os << ";trial=" << t;
            if (!item.ok) {
                os << ";" << item.note << "sets=";
                for (std::size_t i = 0; i < item.sets.size(); ++i) {
                    os << (i ? "|" : "") << detail::set_descriptor(item.sets[i]);
                }
            }
            row.witness = os.str();
            row.exhaustive = true;
            row.seed = cfg.seed;
            row.elapsed_ms = elapsed_for_row(cfg, item.measured_ms);
            sink.add(std::move(row));

            if (cfg.mc_samples > 0) {
                ReportRow mc_row = row;
                mc_row.method = "incidence-mc";
                mc_row.value = item.mc_value;
                std::ostringstream ms;
                ms << "exact=" << item.exact_delta1
                   << ";stderr=" << format_double(item.mc_stderr) << ";trial=" << t;
                mc_row.witness = ms.str();
                mc_row.exhaustive = false;
                sink.add(std::move(mc_row));
            }
        }
    }
    return all_ok ? 0 : 1;
}

} // namespace cli_detail

/// Runs the command line given args (without the program name). Report rows
/// go to --out or `out`; diagnostics go to `err`. Exit codes: 0 pass,
/// 1 assertion failure, 2 configuration or resource error.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"finite-field k-plane transform toolkit"};
    app.require_subcommand(1);

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--q", cfg.q_list, "field sizes (prime powers), comma separated")
            ->delimiter(',');
        sub->add_option("--d", cfg.d, "ambient dimension");
        sub->add_option("--k", cfg.k, "plane dimension");
        sub->add_option("--p", cfg.p_str, "L^p exponent, rational like 3/2 or inf");
        sub->add_option("--r", cfg.r_str, "L^r exponent");
        sub->add_flag("--vertex", cfg.vertex, "use p = (d+1)/(k+1), r = d+1");
        sub->add_option("--trials", cfg.trials, "number of seeded trials");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--threads", cfg.threads,
                        "worker threads (default: FFRADON_THREADS or hardware)");
        sub->add_option("--out", cfg.out_path, "output file (default stdout)");
        sub->add_option("--format", cfg.format, "json-lines or csv")
            ->check(CLI::IsMember({"json-lines", "csv"}));
        sub->add_option("--max-q", cfg.max_q_cap, "cap on the field size");
        sub->add_option("--max-points", cfg.max_points_cap, "cap on q^d and |Pi_k|");
        sub->add_option("--subset-budget", cfg.subset_budget,
                        "exhaustive indicator search while 2^(q^d) fits this budget");
        sub->add_option("--tuple-budget", cfg.tuple_budget, "exhaustive tuple-scan cap");
        sub->add_flag("--timings", cfg.timings, "emit measured elapsed_ms (breaks byte-level "
                                                "reproducibility across runs)");
        sub->add_option("--spread-limit", cfg.spread_limit, "allowed cross-q spread of maxima");
    };

    CLI::App* transform = app.add_subcommand("transform", "dump T f over the plane family");
    add_common(transform);
    transform->add_option("--indicator", cfg.indicator, "point list like '0,0;1,2'");
    transform->add_option("--values", cfg.values, "entries like '0,0:1.5;1,2:2'");
    transform->add_option("--function-file", cfg.function_file,
                          "file with one 'x1,..,xd[:value]' per line");

    CLI::App* scan = app.add_subcommand("scan", "vertex-exponent boundedness experiment");
    add_common(scan);

    CLI::App* sharpness = app.add_subcommand("sharpness", "hull classification vs witness fits");
    add_common(sharpness);
    sharpness->add_option("--grid", cfg.grid, "grid resolution per axis (default 21)");

    CLI::App* lemmas = app.add_subcommand("lemmas", "oscillatory-part bound suite");
    add_common(lemmas);
    lemmas->add_option("--set", cfg.set_literal, "run a single set, e.g. '0,0;1,2'");

    CLI::App* incidence = app.add_subcommand("incidence", "span-count identities on random sets");
    add_common(incidence);
    incidence->add_option("--max-set-size", cfg.max_set_size, "largest |E_i| drawn");
    incidence->add_option("--mc", cfg.mc_samples, "also emit Monte Carlo estimates");

    std::vector<const char*> argv;
    argv.push_back("ffradon");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    for (CLI::App* sub : {transform, scan, sharpness, lemmas, incidence})
        if (sub->parsed()) cfg.cmd = sub->get_name();

    try {
        FamilyCache cache(cfg.caps());
        ReportSink sink(hex64(fnv1a64(cfg.canonical())), FFRADON_BUILD_TAG);
        int code = 0;
        if (cfg.cmd == "transform")
            code = cli_detail::cmd_transform(cfg, cache, sink);
        else if (cfg.cmd == "scan")
            code = cli_detail::cmd_scan(cfg, cache, sink);
        else if (cfg.cmd == "sharpness")
            code = cli_detail::cmd_sharpness(cfg, cache, sink);
        else if (cfg.cmd == "lemmas")
            code = cli_detail::cmd_lemmas(cfg, cache, sink);
        else if (cfg.cmd == "incidence")
            code = cli_detail::cmd_incidence(cfg, cache, sink);

        auto write = [&](std::ostream& os) {
            if (cfg.format == "csv")
                sink.write_csv(os);
            else
                sink.write_json_lines(os);
        };
        if (!cfg.out_path.empty()) {
            std::ofstream file(cfg.out_path, std::ios::binary);
            if (!file) raise(Errc::BadConfig, "cannot open output file " + cfg.out_path);
            write(file);
        } else {
            write(out);
        }
        return code;
    } catch (const Error& e) {
        err << "error: [" << errc_name(e.code()) << "] " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace ffradon
