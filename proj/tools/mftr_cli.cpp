// Command-line front end for the MFTR fading library: density/CDF curves,
// outage/BER/capacity sweeps, seeded sampling, and MSE fitting. Output is
// CSV (or JSON for fit); all errors go to stderr as single-line JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mftr/mftr.hpp"

namespace {

struct CliError {
    std::string code;
    std::string message;
};

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt_sig(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

struct ModelFlags {
    double k = 0.0, delta = 0.0, m = 1.0, mu = 1.0, gamma_bar = 1.0;

    mftr::MftrParams params() const { return mftr::validate({k, delta, m, mu, gamma_bar}); }
    mftr::MftrParams params_with_gb(double gb) const {
        return mftr::validate({k, delta, m, mu, gb});
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_gamma_bar) {
    cmd->add_option("--k", f.k, "specular-to-diffuse power ratio K")->required();
    cmd->add_option("--delta", f.delta, "specular similarity index in [0,1]")->required();
    cmd->add_option("--m", f.m, "shadowing severity index")->required();
    cmd->add_option("--mu", f.mu, "number of multipath clusters")->required();
    if (with_gamma_bar)
        cmd->add_option("--gamma-bar", f.gamma_bar, "mean SNR (Omega in envelope domain)")
            ->required();
}

const std::map<std::string, mftr::Method> kMethodMap{
    {"auto", mftr::Method::automatic},
    {"mgf-inversion", mftr::Method::mgf_inversion},
    {"theta-integral", mftr::Method::theta_integral},
    {"gamma-series", mftr::Method::gamma_series},
};

struct SweepFlags {
    double db_min = 0.0, db_max = 40.0, db_step = 1.0;
    bool linear = false;

    std::vector<double> grid() const {
        if (!(db_step > 0.0)) throw mftr::validation_error("snr-db-step", "step must be > 0");
        if (db_max < db_min) throw mftr::validation_error("snr-db-max", "max below min");
        std::vector<double> g;
        for (double v = db_min; v <= db_max + 1e-9 * db_step; v += db_step) g.push_back(v);
        return g;
    }
    double to_gamma_bar(double v) const { return linear ? v : mftr::db_to_linear(v); }
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& s) {
    cmd->add_option("--snr-db-min", s.db_min, "sweep start (dB unless --linear)");
    cmd->add_option("--snr-db-max", s.db_max, "sweep end");
    cmd->add_option("--snr-db-step", s.db_step, "sweep step");
    cmd->add_flag("--linear", s.linear, "interpret the sweep grid as linear mean SNR");
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw mftr::validation_error("output", "cannot open " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int run(int argc, char** argv) {
    CLI::App app{"MFTR fading-model statistics, metrics, sampling and fitting"};
    app.require_subcommand(1);

    // ---- pdf / cdf ----
    struct CurveArgs {
        ModelFlags model;
        std::string domain = "snr";
        std::string method = "auto";
        double xmin = 0.0, xmax = -1.0;
        std::size_t points = 200;
        bool log_x = false, verify = false;
        std::string output;
        int precision = 12;
    };
    auto curve_args = std::make_shared<CurveArgs>();
    auto add_curve_cmd = [&](const char* name, const char* desc) {
        CLI::App* c = app.add_subcommand(name, desc);
        add_model_flags(c, curve_args->model, true);
        c->add_option("--domain", curve_args->domain, "snr or envelope")
            ->check(CLI::IsMember({"snr", "envelope"}));
        c->add_option("--method", curve_args->method, "evaluation route")
            ->check(CLI::IsMember({"auto", "mgf-inversion", "theta-integral", "gamma-series"}));
        c->add_option("--xmin", curve_args->xmin, "grid start");
        c->add_option("--xmax", curve_args->xmax, "grid end (default 10*gamma-bar or 3*sqrt(Omega))");
        c->add_option("--points", curve_args->points, "grid size")->check(CLI::PositiveNumber);
        c->add_flag("--log-x", curve_args->log_x, "logarithmic abscissa grid");
        c->add_flag("--verify", curve_args->verify,
                    "cross-check against the theta-integral route on stderr");
        c->add_option("--output", curve_args->output, "output path (default stdout)");
        c->add_option("--precision", curve_args->precision, "significant digits")
            ->check(CLI::Range(1, 17));
        return c;
    };
    CLI::App* pdf_cmd = add_curve_cmd("pdf", "evaluate the PDF on a grid");
    CLI::App* cdf_cmd = add_curve_cmd("cdf", "evaluate the CDF on a grid");

    // ---- outage ----
    struct OutageArgs {
        ModelFlags model;
        SweepFlags sweep;
        double rth = 1.0;
        bool asymptotic = false;
        std::string method = "auto";
        std::string output;
        int precision = 12;
    } outage_args;
    CLI::App* outage_cmd = app.add_subcommand("outage", "outage probability vs mean SNR");
    add_model_flags(outage_cmd, outage_args.model, false);
    add_sweep_flags(outage_cmd, outage_args.sweep);
    outage_cmd->add_option("--rth", outage_args.rth, "threshold rate, bits/s/Hz")->required();
    outage_cmd->add_flag("--asymptotic", outage_args.asymptotic, "append the asymptote column");
    outage_cmd->add_option("--method", outage_args.method, "CDF route")
        ->check(CLI::IsMember({"auto", "mgf-inversion", "theta-integral", "gamma-series"}));
    outage_cmd->add_option("--output", outage_args.output, "output path");
    outage_cmd->add_option("--precision", outage_args.precision, "significant digits");

    // ---- ber ----
    struct BerArgs {
        ModelFlags model;
        SweepFlags sweep;
        std::string modulation = "bpsk";
        std::string method = "auto";
        bool asymptotic = false;
        std::string output;
        int precision = 12;
    } ber_args;
    CLI::App* ber_cmd = app.add_subcommand("ber", "average BER vs mean SNR");
    add_model_flags(ber_cmd, ber_args.model, false);
    add_sweep_flags(ber_cmd, ber_args.sweep);
    ber_cmd->add_option("--modulation", ber_args.modulation, "modulation preset")
        ->check(CLI::IsMember({"bpsk"}));
    ber_cmd->add_option("--method", ber_args.method, "evaluation route")
        ->check(CLI::IsMember({"auto", "closed-form", "quadrature"}));
    ber_cmd->add_flag("--asymptotic", ber_args.asymptotic, "append the asymptote column");
    ber_cmd->add_option("--output", ber_args.output, "output path");
    ber_cmd->add_option("--precision", ber_args.precision, "significant digits");

    // ---- capacity ----
    struct CapacityArgs {
        ModelFlags model;
        SweepFlags sweep;
        std::string method = "auto";
        std::string output;
        int precision = 12;
    } cap_args;
    CLI::App* cap_cmd = app.add_subcommand("capacity", "ergodic capacity vs mean SNR");
    add_model_flags(cap_cmd, cap_args.model, false);
    add_sweep_flags(cap_cmd, cap_args.sweep);
    cap_cmd->add_option("--method", cap_args.method, "evaluation route")
        ->check(CLI::IsMember({"auto", "series", "quadrature"}));
    cap_cmd->add_option("--output", cap_args.output, "output path");
    cap_cmd->add_option("--precision", cap_args.precision, "significant digits");

    // ---- sample ----
    struct SampleArgs {
        ModelFlags model;
        std::size_t n = 1000;
        std::uint64_t seed = 1;
        unsigned shards = 1;
        std::string route = "physical";
        std::string domain = "snr";
        std::string output;
        int precision = 12;
    } sample_args;
    CLI::App* sample_cmd = app.add_subcommand("sample", "draw seeded Monte Carlo samples");
    add_model_flags(sample_cmd, sample_args.model, true);
    sample_cmd->add_option("--n", sample_args.n, "sample count")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sample_args.seed, "64-bit seed");
    sample_cmd->add_option("--shards", sample_args.shards, "parallel shard count")
        ->check(CLI::PositiveNumber);
    sample_cmd->add_option("--route", sample_args.route, "physical or mixture")
        ->check(CLI::IsMember({"physical", "mixture"}));
    sample_cmd->add_option("--domain", sample_args.domain, "snr or envelope")
        ->check(CLI::IsMember({"snr", "envelope"}));
    sample_cmd->add_option("--output", sample_args.output, "output path");
    sample_cmd->add_option("--precision", sample_args.precision, "significant digits");

    // ---- fit ----
    struct FitArgs {
        std::string input;
        std::string model = "mftr";
        std::size_t restarts = 16;
        std::uint64_t seed = 1;
        bool normalize = false;
        std::string output;
    } fit_args;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to empirical envelope data");
    fit_cmd->add_option("--input", fit_args.input, "CSV: 'r,density' bins or raw 'r' samples")
        ->required();
    fit_cmd->add_option("--model", fit_args.model, "target distribution")
        ->check(CLI::IsMember({"mftr", "ftr", "kappa-mu-shadowed"}));
    fit_cmd->add_option("--restarts", fit_args.restarts, "Latin-hypercube restarts");
    fit_cmd->add_option("--seed", fit_args.seed, "restart seed");
    fit_cmd->add_flag("--normalize", fit_args.normalize, "rescale data to unit second moment");
    fit_cmd->add_option("--output", fit_args.output, "output path");

    // ---- aof / mgf ----
    struct AofArgs {
        ModelFlags model;
        int precision = 12;
    } aof_args;
    CLI::App* aof_cmd = app.add_subcommand("aof", "amount of fading");
    add_model_flags(aof_cmd, aof_args.model, true);
    aof_cmd->add_option("--precision", aof_args.precision, "significant digits");

    struct MgfArgs {
        ModelFlags model;
        double s = 0.0;
        std::string method = "auto";
        int precision = 12;
    } mgf_args;
    CLI::App* mgf_cmd = app.add_subcommand("mgf", "moment generating function at real s <= 0");
    add_model_flags(mgf_cmd, mgf_args.model, true);
    mgf_cmd->add_option("--s", mgf_args.s, "transform argument")->required();
    mgf_cmd->add_option("--method", mgf_args.method, "closed form (auto) or theta-integral")
        ->check(CLI::IsMember({"auto", "theta-integral"}));
    mgf_cmd->add_option("--precision", mgf_args.precision, "significant digits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "{\"code\":\"usage\",\"message\":\"" << json_escape(e.what()) << "\"}\n";
        return 1;
    }

    // ---- dispatch ----
    if (pdf_cmd->parsed() || cdf_cmd->parsed()) {
        const CurveArgs& a = *curve_args;
        const bool is_pdf = pdf_cmd->parsed();
        const bool envelope = (a.domain == "envelope");
        mftr::MftrParams p = a.model.params();
        mftr::EvalMethod how{kMethodMap.at(a.method), {}};

        double xmax = a.xmax;
        if (xmax < 0.0)
            xmax = envelope ? 3.0 * std::sqrt(p.gamma_bar) : 10.0 * p.gamma_bar;
        double xmin = a.xmin;
        if (a.log_x && !(xmin > 0.0))
            throw mftr::validation_error("xmin", "--log-x requires xmin > 0");
        std::vector<double> xs(a.points);
        for (std::size_t i = 0; i < a.points; ++i) {
            const double t = (a.points == 1) ? 0.0
                                             : static_cast<double>(i) /
                                                   static_cast<double>(a.points - 1);
            xs[i] = a.log_x ? xmin * std::pow(xmax / xmin, t) : xmin + (xmax - xmin) * t;
        }
        auto curve = mftr::density_curve(
            p,
            envelope ? mftr::DensityCurve::Domain::envelope : mftr::DensityCurve::Domain::snr,
            is_pdf ? mftr::DensityCurve::Kind::pdf : mftr::DensityCurve::Kind::cdf, xs, how);
        if (a.verify) {
            mftr::EvalMethod alt{mftr::Method::theta_integral, {}};
            auto check = mftr::density_curve(p, curve.domain, curve.kind, xs, alt);
            double worst = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (std::isfinite(curve.values[i]) && std::isfinite(check.values[i]))
                    worst = std::max(worst, std::abs(curve.values[i] - check.values[i]));
            std::cerr << "verify: max_abs_discrepancy=" << fmt_sig(worst, 6) << "\n";
        }
        Output out(a.output);
        out.stream() << "x,value\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
            out.stream() << fmt_sig(xs[i], a.precision) << ','
                         << fmt_sig(curve.values[i], a.precision) << '\n';
        return 0;
    }

    if (outage_cmd->parsed()) {
        const auto& a = outage_args;
        Output out(a.output);
        const auto grid = a.sweep.grid();
        out.stream() << (a.sweep.linear ? "gamma_bar" : "snr_db") << ",value"
                     << (a.asymptotic ? ",asymptotic" : "") << "\n";
        for (double g : grid) {
            mftr::MftrParams p = a.model.params_with_gb(a.sweep.to_gamma_bar(g));
            mftr::EvalMethod how{kMethodMap.at(a.method), {}};
            auto res = mftr::outage_probability(p, a.rth, how);
            out.stream() << fmt_sig(g, a.precision) << ',' << fmt_sig(res.value, a.precision);
            if (a.asymptotic)
                out.stream() << ',' << fmt_sig(mftr::outage_asymptotic(p, a.rth).value, a.precision);
            out.stream() << '\n';
        }
        return 0;
    }

    if (ber_cmd->parsed()) {
        const auto& a = ber_args;
        const mftr::Modulation mod = mftr::Modulation::bpsk();
        mftr::BerMethod bm = a.method == "closed-form" ? mftr::BerMethod::closed_form
                             : a.method == "quadrature" ? mftr::BerMethod::quadrature
                                                        : mftr::BerMethod::automatic;
        Output out(a.output);
        out.stream() << (a.sweep.linear ? "gamma_bar" : "snr_db") << ",value"
                     << (a.asymptotic ? ",asymptotic" : "") << "\n";
        for (double g : a.sweep.grid()) {
            mftr::MftrParams p = a.model.params_with_gb(a.sweep.to_gamma_bar(g));
            out.stream() << fmt_sig(g, a.precision) << ','
                         << fmt_sig(mftr::avg_ber(p, mod, bm).value, a.precision);
            if (a.asymptotic)
                out.stream() << ',' << fmt_sig(mftr::avg_ber_asymptotic(p, mod).value, a.precision);
            out.stream() << '\n';
        }
        return 0;
    }

    if (cap_cmd->parsed()) {
        const auto& a = cap_args;
        mftr::EcMethod em = a.method == "series" ? mftr::EcMethod::series
                            : a.method == "quadrature" ? mftr::EcMethod::quadrature
                                                       : mftr::EcMethod::automatic;
        Output out(a.output);
        out.stream() << (a.sweep.linear ? "gamma_bar" : "snr_db") << ",value\n";
        for (double g : a.sweep.grid()) {
            mftr::MftrParams p = a.model.params_with_gb(a.sweep.to_gamma_bar(g));
            out.stream() << fmt_sig(g, a.precision) << ','
                         << fmt_sig(mftr::ergodic_capacity(p, {}, em).value, a.precision) << '\n';
        }
        return 0;
    }

    if (sample_cmd->parsed()) {
        const auto& a = sample_args;
        mftr::MftrParams p = a.model.params();
        if (a.route == "physical" && !mftr::is_integer(p.mu))
            throw mftr::validation_error(
                "mu", "physical route requires integer --mu; use --route mixture for real mu");
        mftr::SampleBatch batch =
            a.route == "physical" ? mftr::sample_physical(p, a.n, a.seed, a.shards)
                                  : mftr::sample_mixture(p, a.n, a.seed, a.shards);
        Output out(a.output);
        const bool envelope = (a.domain == "envelope");
        out.stream() << (envelope ? "r" : "gamma") << "\n";
        for (double v : batch.values)
            out.stream() << fmt_sig(envelope ? std::sqrt(v) : v, a.precision) << '\n';
        return 0;
    }

    if (fit_cmd->parsed()) {
        const auto& a = fit_args;
        mftr::EmpiricalPdf data = mftr::load_empirical_csv(a.input);
        const double mass = mftr::normalization_mass(data);
        if (mass < 0.9 || mass > 1.1)
            std::cerr << "warning: binned density integrates to " << fmt_sig(mass, 6)
                      << ", expected ~1\n";
        mftr::FitModel model = a.model == "ftr" ? mftr::FitModel::ftr
                               : a.model == "kappa-mu-shadowed" ? mftr::FitModel::kappa_mu_shadowed
                                                                : mftr::FitModel::mftr;
        mftr::FitConfig cfg;
        cfg.restarts = a.restarts;
        cfg.seed = a.seed;
        cfg.normalize_input = a.normalize;
        mftr::FitResult res = mftr::fit(data, model, cfg);

        std::function<std::string(const mftr::FitResult&)> to_json =
            [&](const mftr::FitResult& r) {
                std::ostringstream os;
                os << "{\"model\":\"" << mftr::fit_model_name(r.model) << "\",\"params\":{"
                   << "\"K\":" << fmt_sig(r.params.k, 17) << ",\"delta\":"
                   << fmt_sig(r.params.delta, 17) << ",\"m\":" << fmt_sig(r.params.m, 17)
                   << ",\"mu\":" << fmt_sig(r.params.mu, 17) << ",\"omega\":"
                   << fmt_sig(r.params.gamma_bar, 17) << "},\"mse\":" << fmt_sig(r.mse, 17)
                   << ",\"converged\":" << (r.converged ? "true" : "false")
                   << ",\"restarts_used\":" << r.restarts_used << ",\"competitors\":[";
                for (std::size_t i = 0; i < r.competitors.size(); ++i)
                    os << (i ? "," : "") << to_json(r.competitors[i]);
                os << "]}";
                return os.str();
            };
        Output out(a.output);
        out.stream() << to_json(res) << "\n";
        return 0;
    }

    if (aof_cmd->parsed()) {
        std::cout << fmt_sig(mftr::aof(aof_args.model.params()), aof_args.precision) << "\n";
        return 0;
    }

    if (mgf_cmd->parsed()) {
        mftr::MftrParams p = mgf_args.model.params();
        mftr::EvalMethod how{mgf_args.method == "theta-integral" ? mftr::Method::theta_integral
                                                                 : mftr::Method::automatic,
                             {}};
        std::cout << fmt_sig(mftr::mgf(p, mgf_args.s, how), mgf_args.precision) << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mftr::validation_error& e) {
        std::cerr << "{\"code\":\"invalid_params\",\"field\":\"" << json_escape(e.field())
                  << "\",\"message\":\"" << json_escape(e.what()) << "\"}\n";
        return 1;
    } catch (const mftr::numeric_error& e) {
        std::cerr << "{\"code\":\"numeric_error\",\"message\":\"" << json_escape(e.what())
                  << "\"}\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "{\"code\":\"error\",\"message\":\"" << json_escape(e.what()) << "\"}\n";
        return 1;
    }
}
