// gt2 — command-line surface for the P2 = {p : p = x^2 + y^2 + 1} toolkit.
//
// Subcommands: sieve, density, wtrick, constants, measure, correlate, gy,
// lemma31, ap-find, verify. Every run emits a ReportEnvelope (JSON with
// canonical key order, or CSV for flat tables) whose payload is a pure
// function of the configuration and seed.
//
// Exit status: 0 success, 2 validation error, 3 resource error, 4 identity
// violation (exact-identity class failures).

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gt2/apsearch.hpp"
#include "gt2/arith.hpp"
#include "gt2/cache.hpp"
#include "gt2/constants.hpp"
#include "gt2/correlate.hpp"
#include "gt2/cutoff.hpp"
#include "gt2/expect.hpp"
#include "gt2/linforms.hpp"
#include "gt2/localfac.hpp"
#include "gt2/measure.hpp"
#include "gt2/report.hpp"
#include "gt2/sieve.hpp"
#include "gt2/weights.hpp"

using namespace gt2;

namespace {

struct GlobalOpts {
    std::string format = "json";
    std::string out;  // empty = stdout
    std::string cache_dir;
    u64 seed = 0;  // fixed default: reproducibility outranks independence
    bool naturals_exclude_zero = false;

    bool zero_allowed() const { return !naturals_exclude_zero; }
};

std::vector<u64> parse_u64_list(const std::string& s) {
    std::vector<u64> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoull(tok));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<u64> primes_cached(const GlobalOpts& g, u64 limit,
                               std::vector<std::string>* provenance) {
    const std::string tag = std::to_string(limit);
    if (!g.cache_dir.empty()) {
        auto load = cache_load_u64(g.cache_dir, CacheKind::Primes, tag);
        if (load.hit) {
            if (provenance) provenance->push_back("primes loaded from cache");
            return std::move(load.values);
        }
        if (load.note != "absent" && provenance)
            provenance->push_back("primes cache miss (" + load.note + "): recomputing");
    }
    auto p = sieve_primes(limit);
    if (!g.cache_dir.empty()) cache_store_u64(g.cache_dir, CacheKind::Primes, tag, p);
    return p;
}

std::vector<u64> load_members_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open members file: " + path);
    std::vector<u64> v;
    u64 x;
    while (in >> x) v.push_back(x);
    if (!std::is_sorted(v.begin(), v.end())) std::sort(v.begin(), v.end());
    return v;
}

void emit(const GlobalOpts& g, ReportEnvelope& env, double ms) {
    env.timing_ms = ms;
    std::string text;
    if (g.format == "csv") {
        text = payload_to_csv(env.payload);
    } else if (g.format == "json") {
        text = env.to_json().dump(2) + "\n";
    } else {
        throw ValidationError("format must be json or csv");
    }
    if (g.out.empty())
        std::cout << text;
    else
        write_text_file(g.out, text);
}

json cert_json(const TwoSquaresCert& c) {
    return json::array({c.x, c.y});
}

json witness_json(const APWitness& w) {
    json j;
    j["a"] = w.a;
    j["d"] = w.d;
    j["k"] = w.k;
    json certs = json::array();
    for (const auto& c : w.certs) certs.push_back(cert_json(c));
    j["certs"] = certs;
    return j;
}

// Shared measure-configuration block (constants / measure / correlate / gy).
struct MeasureOpts {
    u64 X = 930;
    u32 m = 3;
    u64 w = 5;
    u64 q0 = 1;
    i64 b = -1;  // -1: smallest member of S_W
    double gamma = 0.1;
    bool paper_exponent = false;
    std::string config_file;
    CLI::Option* opt_x = nullptr;
    CLI::Option* opt_m = nullptr;
    CLI::Option* opt_w = nullptr;
    CLI::Option* opt_q0 = nullptr;
    CLI::Option* opt_b = nullptr;
    CLI::Option* opt_gamma = nullptr;

    void attach(CLI::App* cmd) {
        opt_x = cmd->add_option("--x", X, "window scale X (N ~ X / (q0^2 W eps_m))");
        opt_m = cmd->add_option("--m", m, "pseudorandomness parameter m (>= 3)");
        opt_w = cmd->add_option("--w", w, "W-trick cutoff w (W = product of primes <= w)");
        opt_q0 = cmd->add_option("--q0", q0, "scaling parameter q0");
        opt_b = cmd->add_option("--b", b, "residue b (default: smallest member of S_W)");
        opt_gamma = cmd->add_option("--gamma", gamma, "R = N^gamma override, in (0, 1/2)");
        cmd->add_flag("--paper-exponent", paper_exponent,
                      "use the paper exponent R = N^{1/(2^{m+4} m)} instead of gamma");
        cmd->add_option("--config", config_file,
                        "key=value file with x, m, w, q0, b, gamma, paper-exponent "
                        "(explicit flags win)");
    }

    // key=value lines; '#' comments; unknown keys rejected. Flags passed on
    // the command line take precedence over the file.
    void apply_config() {
        if (config_file.empty()) return;
        std::ifstream in(config_file);
        if (!in) throw ResourceError("cannot open config file: " + config_file);
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
                if (blank) continue;
                throw ValidationError("config line is not key=value: " + line);
            }
            auto trim = [](std::string v) {
                const auto a = v.find_first_not_of(" \t\r");
                const auto z = v.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : v.substr(a, z - a + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key == "x") {
                if (!opt_x->count()) X = std::stoull(val);
            } else if (key == "m") {
                if (!opt_m->count()) m = u32(std::stoul(val));
            } else if (key == "w") {
                if (!opt_w->count()) w = std::stoull(val);
            } else if (key == "q0") {
                if (!opt_q0->count()) q0 = std::stoull(val);
            } else if (key == "b") {
                if (!opt_b->count()) b = std::stoll(val);
            } else if (key == "gamma") {
                if (!opt_gamma->count()) gamma = std::stod(val);
            } else if (key == "paper-exponent") {
                paper_exponent = (val == "1" || val == "true" || val == "yes");
            } else {
                throw ValidationError("unknown config key: " + key);
            }
        }
    }

    MeasureParams build(std::vector<std::string>* provenance) {
        apply_config();
        const u64 W = primorial(w);
        u64 bb;
        if (b < 0) {
            const SWSet sw = compute_sw(W, q0);
            if (sw.members.empty()) throw ValidationError("S_W is empty for this (W, q0)");
            bb = sw.members.front();
        } else {
            bb = u64(b);
        }
        std::optional<double> g;
        if (!paper_exponent) g = gamma;
        MeasureParams mp = build_measure_params(X, m, w, W, q0, bb, g);
        if (provenance) {
            if (mp.widenings > 0)
                provenance->push_back("N-window widened " + std::to_string(mp.widenings) +
                                      " times (doubling)");
            provenance->push_back(mp.paper_exponent
                                      ? "R uses the paper exponent 1/(2^{m+4} m)"
                                      : "R = N^gamma override, gamma = " + std::to_string(gamma));
            if (mp.R < 2.0) provenance->push_back("R < 2: all divisor sums collapse to 1");
            u64 nxt = w + 1;
            while (!is_prime(nxt)) ++nxt;
            if (mp.R <= double(nxt))
                provenance->push_back("R <= " + std::to_string(nxt) +
                                      " (next prime past w): divisor sums are degenerate");
        }
        return mp;
    }
};

NormalizationConstants build_constants(const std::vector<u64>& primes, u64 prime_limit,
                                       const std::vector<double>& schedule, double psi_T,
                                       double psi_step, CChiVariant variant,
                                       const MeasureParams* mp_for_empirical,
                                       std::vector<std::string>* provenance) {
    NormalizationConstants c;
    const Alpha0Result a0 = compute_alpha0(primes, prime_limit, schedule);
    c.alpha0 = a0.method_b;
    c.alpha0_method_a = a0.method_a;
    c.alpha0_gap_rel = a0.gap_rel;
    c.alpha0_tail_low = a0.tail_low;
    c.alpha0_tail_high = a0.tail_high;
    const Upsilon0Result u0 = compute_upsilon0(primes, std::min<u64>(prime_limit, 1'000'000));
    c.upsilon0 = u0.value;
    const PsiTransform psi = compute_psi(psi_T, psi_step);
    c.psi_residual = psi.reconstruction_residual;
    c.c_chi_paper = c_chi_paper(psi);
    c.c_chi_factorized = c_chi_factorized(psi);
    if (mp_for_empirical) c.c_chi_empirical = calibrate_empirical_c_chi(*mp_for_empirical, c.alpha0);
    c.c_chi_variant = variant;
    switch (variant) {
        case CChiVariant::PaperFormula: c.c_chi = c.c_chi_paper; break;
        case CChiVariant::Factorized: c.c_chi = c.c_chi_factorized; break;
        case CChiVariant::Empirical:
            if (!mp_for_empirical)
                throw ValidationError("empirical C_chi variant needs a measure configuration");
            c.c_chi = c.c_chi_empirical;
            break;
    }
    c.validate();
    if (provenance)
        provenance->push_back("C_chi variant: " + to_string(variant));
    return c;
}

json constants_json(const NormalizationConstants& c) {
    json j;
    j["alpha0"] = c.alpha0;
    j["alpha0_tail_low"] = c.alpha0_tail_low;
    j["alpha0_tail_high"] = c.alpha0_tail_high;
    j["alpha0_method_a"] = c.alpha0_method_a;
    j["alpha0_gap_rel"] = c.alpha0_gap_rel;
    j["upsilon0"] = c.upsilon0;
    j["c_chi"] = c.c_chi;
    j["c_chi_variant"] = to_string(c.c_chi_variant);
    j["c_chi_paper"] = c.c_chi_paper;
    j["c_chi_factorized"] = c.c_chi_factorized;
    j["c_chi_empirical"] = c.c_chi_empirical;
    j["psi_residual"] = c.psi_residual;
    return j;
}

json report_json(const CorrelationReport& r) {
    json j;
    j["estimate"] = r.estimate;
    j["stderr"] = r.stderr_est;
    j["samples"] = r.samples;
    j["exact"] = r.exact;
    j["target"] = r.target;
    j["form_count"] = r.form_count;
    j["seed"] = r.seed;
    j["label"] = r.label;
    return j;
}

CChiVariant parse_variant(const std::string& s) {
    if (s == "empirical") return CChiVariant::Empirical;
    if (s == "factorized") return CChiVariant::Factorized;
    if (s == "paper-formula") return CChiVariant::PaperFormula;
    throw ValidationError("unknown C_chi variant: " + s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gt2: numerical toolkit for primes of the form x^2 + y^2 + 1"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "gt2 1.0.0");

    GlobalOpts g;
    if (const char* env = std::getenv("GT2_CACHE_DIR")) g.cache_dir = env;
    app.add_option("--format", g.format, "output format: json | csv");
    app.add_option("--out", g.out, "write the report to this path (default stdout)");
    app.add_option("--cache-dir", g.cache_dir, "cache directory (env GT2_CACHE_DIR)");
    app.add_option("--seed", g.seed, "Monte-Carlo seed (default 0, never wall-clock)");
    app.add_flag("--naturals-exclude-zero", g.naturals_exclude_zero,
                 "treat N as {1, 2, ...} in x^2 + y^2 representations");

    // ---- sieve
    auto* c_sieve = app.add_subcommand("sieve", "enumerate P2 up to x-max");
    u64 sieve_xmax = 1000;
    std::string members_out;
    c_sieve->add_option("--x-max", sieve_xmax, "upper bound")->required();
    c_sieve->add_option("--members-out", members_out, "write members, one per line");

    // ---- density
    auto* c_density = app.add_subcommand("density", "R_q / P2 counting and fitted constants");
    u64 density_q = 0;
    std::string density_checkpoints = "1000,10000";
    std::string density_window = "unit";
    c_density->add_option("--q", density_q, "q >= 1 for R_q; 0 for the whole P2 family");
    c_density->add_option("--checkpoints", density_checkpoints, "comma-separated X values");
    c_density->add_option("--window", density_window, "unit ([1,X]) or dyadic ([X,2X])");

    // ---- wtrick
    auto* c_wtrick = app.add_subcommand("wtrick", "two-stage pigeonhole selection of (q0, b)");
    u64 wt_x = 500, wt_w = 2, wt_q0max = 1;
    std::string wt_afile;
    c_wtrick->add_option("--x", wt_x, "window [X, 2X]")->required();
    c_wtrick->add_option("--w", wt_w, "primorial cutoff w");
    c_wtrick->add_option("--q0-max", wt_q0max, "Q0: search q0 in [1, Q0]");
    c_wtrick->add_option("--a-file", wt_afile, "subset A as newline-delimited integers");

    // ---- constants
    auto* c_constants = app.add_subcommand("constants", "alpha0, upsilon0, C_chi");
    u64 cn_plim = 10'000'000;
    std::string cn_schedule = "0.08,0.04,0.02,0.01";
    double cn_T = 240.0, cn_step = 0.05;
    std::string cn_variant = "empirical";
    MeasureOpts cn_meas;
    c_constants->add_option("--prime-limit", cn_plim, "Euler-product cutoff");
    c_constants->add_option("--schedule", cn_schedule, "delta schedule for the alpha0 limit");
    c_constants->add_option("--psi-T", cn_T, "psi grid truncation");
    c_constants->add_option("--psi-step", cn_step, "psi grid step (<= 0.1)");
    c_constants->add_option("--cchi-variant", cn_variant, "empirical | factorized | paper-formula");
    cn_meas.attach(c_constants);

    // ---- measure
    auto* c_measure = app.add_subcommand("measure", "E(nu | Z_N), E(f | Z_N), window diagnostics");
    MeasureOpts ms_meas;
    u64 ms_budget = 1'000'000;
    std::string ms_variant = "empirical";
    std::string ms_afile;
    ms_meas.attach(c_measure);
    c_measure->add_option("--budget", ms_budget, "Monte-Carlo budget");
    c_measure->add_option("--cchi-variant", ms_variant, "C_chi variant for nu");
    c_measure->add_option("--a-file", ms_afile, "subset A for f");

    // ---- correlate
    auto* c_corr = app.add_subcommand("correlate", "CFZ linear-forms checks / rearrangement");
    MeasureOpts co_meas;
    u64 co_budget = 1'000'000;
    std::string co_rho = "acceptance";
    bool co_rearrange = false;
    std::string co_system;
    double co_R = 10.0;
    u64 co_box_len = 1000, co_box_start = 1;
    co_meas.attach(c_corr);
    c_corr->add_option("--budget", co_budget, "Monte-Carlo budget per rho choice");
    c_corr->add_option("--rho", co_rho, "acceptance | exhaustive | sampled");
    c_corr->add_flag("--rearrange", co_rearrange, "run the exact rearrangement identity instead");
    c_corr->add_option("--system", co_system, "form-system fixture (rearrange mode)");
    c_corr->add_option("--r", co_R, "divisor-sum truncation R (rearrange mode)");
    c_corr->add_option("--box-len", co_box_len, "box side length (rearrange mode)");
    c_corr->add_option("--box-start", co_box_start, "box origin (rearrange mode)");
    std::string co_reports_out;
    c_corr->add_option("--reports-out", co_reports_out,
                       "write CorrelationReports as JSON lines to this path");

    // ---- gy
    auto* c_gy = app.add_subcommand("gy", "Goldston-Yildirim LHS/RHS ratio");
    MeasureOpts gy_meas;
    double gy_logR = 2.0;
    u64 gy_box_len = 1'000'000, gy_box_start = 1, gy_box_min = 10'000;
    std::string gy_system;
    std::string gy_variant = "empirical";
    double gy_cchi_override = 0.0;
    gy_meas.attach(c_gy);
    c_gy->add_option("--log-r", gy_logR, "log R (R = e^{log-r})");
    c_gy->add_option("--box-len", gy_box_len, "box side length");
    c_gy->add_option("--box-start", gy_box_start, "box origin");
    c_gy->add_option("--box-min", gy_box_min, "configured minimum side length");
    c_gy->add_option("--system", gy_system, "base form-system fixture (default psi(x) = x)");
    c_gy->add_option("--cchi-variant", gy_variant, "C_chi variant for the RHS");
    c_gy->add_option("--cchi-value", gy_cchi_override, "explicit C_chi for the RHS (overrides)");

    // ---- lemma31
    auto* c_lemma = app.add_subcommand("lemma31", "two-class Euler-product ratio checks");
    std::string lm_c = "2";
    std::string lm_class = "3mod4";
    std::string lm_schedule = "0.1,0.03,0.01";
    u64 lm_plim = 10'000'000;
    bool lm_perturb = false;
    c_lemma->add_option("--c", lm_c, "comma-separated c_j constants (k <= 4)");
    c_lemma->add_option("--class", lm_class, "3mod4 | other");
    c_lemma->add_option("--schedule", lm_schedule, "delta schedule");
    c_lemma->add_option("--prime-limit", lm_plim, "product cutoff cap");
    c_lemma->add_flag("--perturb", lm_perturb, "c_{p,1} = c_1 + 1/p (H-proxy)");

    // ---- ap-find
    auto* c_ap = app.add_subcommand("ap-find", "arithmetic progressions in P2 / the W-tricked class");
    u64 ap_xmax = 1'000'000;
    u32 ap_k = 3;
    u64 ap_limit = 10;
    bool ap_subprogs = false;
    bool ap_in_class = false;
    u64 ap_w = 5, ap_q0 = 1;
    i64 ap_b = -1;
    u64 ap_nlo = 1, ap_nhi = 100000;
    std::string ap_witness_out;
    c_ap->add_option("--x-max", ap_xmax, "search bound");
    c_ap->add_option("--k", ap_k, "progression length (>= 3)");
    c_ap->add_option("--limit", ap_limit, "stop after this many witnesses (0 = all)");
    c_ap->add_flag("--include-subprogressions", ap_subprogs, "report non-maximal runs too");
    c_ap->add_flag("--in-class", ap_in_class, "search the W-tricked class instead of P2");
    c_ap->add_option("--w", ap_w, "w for the class search");
    c_ap->add_option("--q0", ap_q0, "q0 for the class search");
    c_ap->add_option("--b", ap_b, "b for the class search (default: smallest S_W member)");
    c_ap->add_option("--n-lo", ap_nlo, "class search n-range low");
    c_ap->add_option("--n-hi", ap_nhi, "class search n-range high");
    c_ap->add_option("--witness-out", ap_witness_out, "write witnesses as JSON lines");

    // ---- verify
    auto* c_verify = app.add_subcommand("verify", "re-verify AP witnesses from a JSON-lines file");
    std::string vf_file;
    c_verify->add_option("--witness-file", vf_file, "JSON lines: {a, d, k, certs}")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    ReportEnvelope env;
    env.config["seed"] = g.seed;
    env.config["naturals_include_zero"] = g.zero_allowed();

    try {
        if (*c_sieve) {
            env.command = "sieve";
            env.config["x_max"] = sieve_xmax;
            P2Table table;
            bool cache_hit = false;
            const std::string tag =
                "p2-" + std::to_string(sieve_xmax) + (g.zero_allowed() ? "-z1" : "-z0");
            if (!g.cache_dir.empty()) {
                auto load = cache_load_u64(g.cache_dir, CacheKind::SpfSegment, tag);
                if (load.hit) {
                    table.x_max = sieve_xmax;
                    table.zero_allowed = g.zero_allowed();
                    table.members = std::move(load.values);
                    cache_hit = true;
                } else if (load.note != "absent") {
                    env.provenance.push_back("cache miss (" + load.note + "): recomputing");
                }
            }
            if (!cache_hit) {
                table = sieve_p2(sieve_xmax, g.zero_allowed());
                if (!g.cache_dir.empty())
                    cache_store_u64(g.cache_dir, CacheKind::SpfSegment, tag, table.members);
            } else {
                env.provenance.push_back("members loaded from cache");
            }
            if (!members_out.empty()) {
                std::string text;
                for (u64 p : table.members) text += std::to_string(p) + "\n";
                write_text_file(members_out, text);
            }
            env.payload["x_max"] = sieve_xmax;
            env.payload["count"] = table.members.size();
            json head = json::array();
            for (size_t i = 0; i < std::min<size_t>(20, table.members.size()); ++i)
                head.push_back(table.members[i]);
            env.payload["members_head"] = head;
            if (!table.members.empty()) env.payload["last_member"] = table.members.back();
        } else if (*c_density) {
            env.command = "density";
            const auto cps = parse_u64_list(density_checkpoints);
            const WindowKind wk =
                density_window == "dyadic" ? WindowKind::Dyadic : WindowKind::UnitToX;
            env.config["q"] = density_q;
            env.config["window"] = density_window;
            env.config["checkpoints"] = cps;
            const DensityReport rep = density_report(density_q, cps, wk, g.zero_allowed());
            json cols = json::array({"X", "count", "fitted_C"});
            json rows = json::array();
            for (const auto& cp : rep.checkpoints)
                rows.push_back(json::array({cp.x, cp.count, cp.fitted_c}));
            env.payload["columns"] = cols;
            env.payload["rows"] = rows;
        } else if (*c_wtrick) {
            env.command = "wtrick";
            env.config["x"] = wt_x;
            env.config["w"] = wt_w;
            env.config["q0_max"] = wt_q0max;
            std::vector<u64> members;
            if (!wt_afile.empty()) {
                members = load_members_file(wt_afile);
                env.provenance.push_back("A loaded from file (" + std::to_string(members.size()) +
                                         " members)");
            } else {
                members = sieve_p2(2 * wt_x, g.zero_allowed()).members;
            }
            const WTrickParams wt = select_wtrick(members, wt_x, wt_w, wt_q0max, g.zero_allowed());
            env.payload["w"] = wt.w;
            env.payload["W"] = wt.W;
            env.payload["Q0"] = wt.Q0;
            env.payload["q0"] = wt.q0;
            env.payload["b"] = wt.b;
            env.payload["score"] = wt.score;
            env.payload["window_total"] = wt.window_total;
            env.payload["window_covered"] = wt.window_covered;
            env.payload["sw_size"] = wt.sw_size;
            env.payload["pigeonhole_covered_ok"] = wt.pigeonhole_covered_ok;
            env.payload["pigeonhole_literal_ok"] = wt.pigeonhole_literal_ok;
            if (!wt.pigeonhole_literal_ok)
                env.provenance.push_back(
                    "literal pigeonhole bound (vs |A∩window|) did not hold; covered-count bound did");
        } else if (*c_constants) {
            env.command = "constants";
            env.config["prime_limit"] = cn_plim;
            env.config["schedule"] = cn_schedule;
            env.config["cchi_variant"] = cn_variant;
            const auto primes = primes_cached(g, cn_plim, &env.provenance);
            MeasureParams mp = cn_meas.build(&env.provenance);
            const auto variant = parse_variant(cn_variant);
            const NormalizationConstants c =
                build_constants(primes, cn_plim, parse_double_list(cn_schedule), cn_T, cn_step,
                                variant, &mp, &env.provenance);
            env.payload = constants_json(c);
            env.payload["measure_N"] = mp.N;
            env.payload["measure_R"] = mp.R;
            if (!g.cache_dir.empty())
                cache_store_text(g.cache_dir, CacheKind::Constants, "latest",
                                 env.payload.dump(2));
        } else if (*c_measure) {
            env.command = "measure";
            env.config["budget"] = ms_budget;
            env.config["cchi_variant"] = ms_variant;
            MeasureParams mp = ms_meas.build(&env.provenance);
            const auto primes = primes_cached(g, 10'000'000, &env.provenance);
            const auto variant = parse_variant(ms_variant);
            NormalizationConstants c = build_constants(primes, 10'000'000, {0.08, 0.04, 0.02, 0.01},
                                                       240.0, 0.05, variant, &mp, &env.provenance);
            std::vector<u64> subset;
            const std::vector<u64>* subset_ptr = nullptr;
            if (!ms_afile.empty()) {
                subset = load_members_file(ms_afile);
                subset_ptr = &subset;
            }
            NuEvaluator nu(mp, c, subset_ptr, g.zero_allowed());
            env.payload["N"] = mp.N;
            env.payload["R"] = mp.R;
            env.payload["window_lo"] = mp.window_lo;
            env.payload["window_hi"] = mp.window_hi;
            env.payload["constants"] = constants_json(c);
            env.payload["mean_nu_exact"] = nu.exact_mean_nu();
            env.payload["mean_f_exact"] = nu.exact_mean_f();
            const auto mc = expectation_mc(ms_budget, g.seed, [&](u64 i) {
                return nu.nu(counter_uniform(g.seed, 0, i, mp.N));
            });
            env.payload["mean_nu_mc"] = mc.estimate;
            env.payload["mean_nu_mc_stderr"] = mc.stderr_est;
            // window-conditioned diagnostics per variant
            const double kernel_mean = nu.window_kernel_mean();
            env.payload["window_kernel_mean"] = kernel_mean;
            json wm;
            wm["empirical"] = c.c_chi_empirical > 0 ? kernel_mean / c.c_chi_empirical : 0.0;
            wm["factorized"] = kernel_mean / c.c_chi_factorized;
            wm["paper-formula"] = kernel_mean / c.c_chi_paper;
            env.payload["window_mean_nu_by_variant"] = wm;
        } else if (*c_corr) {
            env.command = "correlate";
            if (co_rearrange) {
                env.config["mode"] = "rearrange";
                env.config["r"] = co_R;
                env.config["box_len"] = co_box_len;
                env.config["box_start"] = co_box_start;
                LinearFormSystem base;
                if (!co_system.empty()) {
                    base = load_form_system(co_system);
                } else {
                    base.h = 1;
                    base.forms.push_back({{1}, 0});
                }
                const u64 W = primorial(co_meas.w);
                const SWSet sw = compute_sw(W, co_meas.q0);
                const u64 b = co_meas.b >= 0 ? u64(co_meas.b) : sw.members.at(0);
                const ThetaSystem theta = attach_wtrick(base, co_meas.w, W, co_meas.q0, b);
                if (!theta.coeff_bound_ok)
                    env.provenance.push_back("coefficient bound |L| <= sqrt(w)/2 violated");
                Box box;
                for (size_t i = 0; i < base.h; ++i) {
                    box.start.push_back(i64(co_box_start));
                    box.len.push_back(co_box_len);
                }
                const RearrangementResult rr = rearrangement_check(theta, co_R, box);
                env.payload["lhs"] = rr.lhs;
                env.payload["rhs"] = rr.rhs;
                env.payload["deviation"] = rr.deviation;
                env.payload["tuples"] = rr.tuples;
                env.payload["ok"] = rr.ok;
                if (!rr.ok) throw IdentityViolation("rearrangement identity failed");
            } else {
                if (co_budget == 0) throw ValidationError("correlate: budget must be positive");
                env.config["mode"] = "cfz";
                env.config["budget"] = co_budget;
                env.config["rho"] = co_rho;
                MeasureParams mp = co_meas.build(&env.provenance);
                const auto primes = primes_cached(g, 10'000'000, &env.provenance);
                NormalizationConstants c =
                    build_constants(primes, 10'000'000, {0.08, 0.04, 0.02, 0.01}, 240.0, 0.05,
                                    CChiVariant::Empirical, &mp, &env.provenance);
                NuEvaluator nu(mp, c, nullptr, g.zero_allowed());
                RhoMode mode = RhoMode::Acceptance;
                if (co_rho == "exhaustive") mode = RhoMode::Exhaustive;
                else if (co_rho == "sampled") mode = RhoMode::Sampled;
                else if (co_rho != "acceptance") throw ValidationError("unknown rho mode");
                const auto reports = check_linear_forms(nu, co_meas.m, co_budget, g.seed, mode);
                json arr = json::array();
                std::string lines;
                for (const auto& r : reports) {
                    json rj = report_json(r);
                    arr.push_back(rj);
                    lines += rj.dump() + "\n";
                }
                if (!co_reports_out.empty()) write_text_file(co_reports_out, lines);
                env.payload["N"] = mp.N;
                env.payload["R"] = mp.R;
                env.payload["reports"] = arr;
            }
        } else if (*c_gy) {
            env.command = "gy";
            env.config["log_r"] = gy_logR;
            env.config["box_len"] = gy_box_len;
            env.config["box_start"] = gy_box_start;
            LinearFormSystem base;
            if (!gy_system.empty()) {
                base = load_form_system(gy_system);
            } else {
                base.h = 1;
                base.forms.push_back({{1}, 0});
            }
            const u32 m = static_cast<u32>(base.forms.size());
            const u64 W = primorial(gy_meas.w);
            const SWSet sw = compute_sw(W, gy_meas.q0);
            const u64 b = gy_meas.b >= 0 ? u64(gy_meas.b) : sw.members.at(0);
            const ThetaSystem theta = attach_wtrick(base, gy_meas.w, W, gy_meas.q0, b);
            if (!theta.coeff_bound_ok)
                env.provenance.push_back("coefficient bound |L| <= sqrt(w)/2 violated (recorded)");
            const double R = std::exp(gy_logR);
            if (gy_box_len < gy_box_min)
                throw ValidationError("gy: box side below the configured minimum");
            Box box;
            for (size_t i = 0; i < base.h; ++i) {
                box.start.push_back(i64(gy_box_start));
                box.len.push_back(gy_box_len);
            }
            double c_chi = gy_cchi_override;
            NormalizationConstants c;
            const auto primes = primes_cached(g, 10'000'000, &env.provenance);
            if (c_chi <= 0.0) {
                // Default calibration: the empirical constant of the default-w
                // measure kernel at this R (see README on the o_w(1) trend).
                MeasureOpts cal = gy_meas;
                cal.w = 5;
                cal.b = -1;
                MeasureParams cal_mp = cal.build(nullptr);
                cal_mp.R = R;  // calibrate at the gy reference R
                c = build_constants(primes, 10'000'000, {0.08, 0.04, 0.02, 0.01}, 240.0, 0.05,
                                    parse_variant(gy_variant), &cal_mp, &env.provenance);
                c_chi = c.c_chi;
                env.provenance.push_back("C_chi calibrated at w=5, R=e^" + std::to_string(gy_logR));
            } else {
                c = build_constants(primes, 10'000'000, {0.08, 0.04, 0.02, 0.01}, 240.0, 0.05,
                                    CChiVariant::Factorized, nullptr, &env.provenance);
                env.provenance.push_back("C_chi explicitly overridden");
            }
            const double lhs = gy_lhs(theta, R, box);
            const double rhs = gy_rhs(W, R, c.alpha0, c_chi, m);
            env.payload["lhs"] = lhs;
            env.payload["rhs"] = rhs;
            env.payload["ratio"] = lhs / rhs;
            env.payload["c_chi_used"] = c_chi;
            env.payload["m"] = m;
            env.payload["W"] = W;
            env.payload["b"] = b;
            env.payload["ratio_factorized"] = lhs / gy_rhs(W, R, c.alpha0, c.c_chi_factorized, m);
            env.payload["ratio_paper"] = lhs / gy_rhs(W, R, c.alpha0, c.c_chi_paper, m);
            const double paper_min = std::pow(R, 10.0 * double(m));
            bool paper_ok = true;
            for (u64 l : box.len) paper_ok &= (double(l) >= paper_min);
            env.payload["paper_box_constraint_met"] = paper_ok;
            if (!paper_ok)
                env.provenance.push_back("box relaxed below the R^{10m} side-length requirement "
                                         "(configured minimum " + std::to_string(gy_box_min) + ")");
        } else if (*c_lemma) {
            env.command = "lemma31";
            env.config["c"] = lm_c;
            env.config["class"] = lm_class;
            env.config["schedule"] = lm_schedule;
            env.config["prime_limit"] = lm_plim;
            env.config["perturb"] = lm_perturb;
            LemmaCTable table;
            table.c = parse_double_list(lm_c);
            table.perturb_first = lm_perturb;
            const bool class3 = lm_class == "3mod4";
            if (!class3 && lm_class != "other")
                throw ValidationError("--class must be 3mod4 or other");
            const auto primes = primes_cached(g, lm_plim, &env.provenance);
            const auto pts =
                lemma31_ratio(table, class3, parse_double_list(lm_schedule), lm_plim, primes);
            json cols = json::array({"delta", "ratio", "cutoff"});
            json rows = json::array();
            for (const auto& pt : pts)
                rows.push_back(json::array({pt.delta, pt.ratio, pt.cutoff}));
            env.payload["columns"] = cols;
            env.payload["rows"] = rows;
        } else if (*c_ap) {
            env.command = "ap-find";
            env.config["k"] = ap_k;
            env.config["limit"] = ap_limit;
            json warr = json::array();
            std::string lines;
            if (ap_in_class) {
                env.config["mode"] = "class";
                const u64 W = primorial(ap_w);
                const SWSet sw = compute_sw(W, ap_q0);
                const u64 b = ap_b >= 0 ? u64(ap_b) : sw.members.at(0);
                const auto res = find_aps_in_class(W, ap_q0, b, ap_nlo, ap_nhi, ap_k, ap_limit,
                                                   nullptr, g.zero_allowed());
                for (size_t i = 0; i < res.p_space.size(); ++i) {
                    json j = witness_json(res.p_space[i]);
                    j["n_a"] = res.n_space[i].first;
                    j["n_d"] = res.n_space[i].second;
                    warr.push_back(j);
                    lines += j.dump() + "\n";
                }
            } else {
                env.config["mode"] = "p2";
                env.config["x_max"] = ap_xmax;
                const P2Table table = sieve_p2(ap_xmax, g.zero_allowed());
                const auto aps = find_aps(table.members, ap_xmax, ap_k, ap_limit, ap_subprogs,
                                          g.zero_allowed());
                for (const auto& w : aps) {
                    json j = witness_json(w);
                    warr.push_back(j);
                    lines += j.dump() + "\n";
                }
            }
            if (!ap_witness_out.empty()) write_text_file(ap_witness_out, lines);
            env.payload["witnesses"] = warr;
            env.payload["count"] = warr.size();
        } else if (*c_verify) {
            env.command = "verify";
            env.config["witness_file"] = vf_file;
            std::ifstream in(vf_file);
            if (!in) throw ResourceError("cannot open witness file: " + vf_file);
            json results = json::array();
            std::string line;
            u64 ok_count = 0, total = 0;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded()) throw ValidationError("malformed witness JSON line");
                APWitness w;
                w.a = j.at("a").get<u64>();
                w.d = j.at("d").get<u64>();
                w.k = j.at("k").get<u32>();
                if (j.contains("certs"))
                    for (const auto& c : j["certs"]) {
                        TwoSquaresCert cert;
                        cert.x = c.at(0).get<u64>();
                        cert.y = c.at(1).get<u64>();
                        cert.n = cert.x * cert.x + cert.y * cert.y;
                        cert.primitive = gcd_u64(cert.x, cert.y) == 1;
                        w.certs.push_back(cert);
                    }
                const bool ok = verify_ap(w, g.zero_allowed());
                ok_count += ok;
                ++total;
                json r;
                r["a"] = w.a;
                r["d"] = w.d;
                r["k"] = w.k;
                r["valid"] = ok;
                results.push_back(r);
            }
            env.payload["results"] = results;
            env.payload["total"] = total;
            env.payload["valid"] = ok_count;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const IdentityViolation& e) {
        std::cerr << "identity violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    try {
        emit(g, env, ms);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
