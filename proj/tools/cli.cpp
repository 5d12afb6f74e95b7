#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <type_traits>

#include "qiopa/amplifier.hpp"
#include "qiopa/channels.hpp"
#include "qiopa/cloning.hpp"
#include "qiopa/errors.hpp"
#include "qiopa/io.hpp"
#include "qiopa/measurement.hpp"
#include "qiopa/wigner.hpp"

namespace qiopa::cli {

namespace {

using json = nlohmann::json;

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

// One CLI/config parameter: the flag, its bound variable, and how to read and
// echo it as JSON. Keys use the flag spelling; config files may also use '_'.
struct Param {
    std::string key;
    CLI::Option* opt;
    std::function<json()> get;
    std::function<void(const json&)> set;
    bool echo = true;
};

struct Context {
    std::string out_path;
    std::uint64_t seed;
    double epsilon;
    json provenance;
    std::ostream& out;
};

struct Command {
    CLI::App* app = nullptr;
    std::vector<Param> params;
    std::function<void(Context&)> run;

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help, bool echo = true) {
        CLI::Option* o;
        if constexpr (std::is_same_v<T, bool>) {
            o = app->add_flag("--" + key, var, help);
        } else {
            o = app->add_option("--" + key, var, help);
            if constexpr (is_vector<T>::value) o->delimiter(',');
        }
        params.push_back({key, o, [&var] { return json(var); },
                          [&var, key](const json& j) {
                              try {
                                  var = j.get<T>();
                              } catch (const json::exception&) {
                                  throw ValidationError("config key '" + key + "' has the wrong type");
                              }
                          },
                          echo});
        return o;
    }
};

void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot open output file '" + path + "'");
    write(f);
    f.flush();
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void require_epsilon(double eps) {
    if (!(eps > 0 && eps < 0.1)) throw ValidationError("--epsilon-trunc must lie in (0, 0.1)");
}

PolarizationFrame frame_from(const std::vector<double>& v, const char* name) {
    if (v.size() != 2) throw ValidationError(std::string("--") + name + " takes two numbers: theta,phi");
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError(std::string("--") + name + " must be finite");
    return {v[0], v[1]};
}

json grid_json(const GridSpec& g) {
    return {{"re_min", g.re_min}, {"re_max", g.re_max}, {"im_min", g.im_min},
            {"im_max", g.im_max}, {"re_points", g.re_points}, {"im_points", g.im_points}};
}

// ---- fringe

struct FringeArgs {
    std::string config = "collinear";
    double g = 1.0;
    int phases = 24;
};

void run_fringe(const FringeArgs& a, Context& ctx) {
    AmplifierParams p(a.g);
    const Config cfg = config_from_string(a.config);
    if (a.phases < 3) throw ValidationError("--phases must be at least 3");
    std::vector<double> ph;
    for (int i = 0; i < a.phases; ++i) ph.push_back(2 * M_PI * i / a.phases);
    auto f = fringe_scan(cfg, p, ph, ctx.epsilon);
    const double m = p.mbar();
    const double closed = cfg == Config::collinear ? (2 * m + 1) / (4 * m + 1) : (m + 1) / (3 * m + 1);
    CsvTable t({"config", "g", "phase_rad", "M_plus", "M_minus", "visibility", "visibility_closed_form"});
    for (std::size_t i = 0; i < ph.size(); ++i)
        t.add_row({to_string(cfg), a.g, ph[i], f.plus[i], f.minus[i], f.visibility, closed});
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { t.write(os, ctx.provenance); });
}

// ---- bures

struct BuresArgs {
    std::vector<std::string> kinds{"pc", "universal", "coherent"};
    double nbar = 12.5;
    double x_max = 3.0;
    int x_points = 31;
};

void run_bures(const BuresArgs& a, Context& ctx) {
    if (a.x_points < 2) throw ValidationError("--x-points must be at least 2");
    if (!(a.x_max > 0)) throw ValidationError("--x-max must be positive");
    if (a.kinds.empty()) throw ValidationError("--kinds is empty");
    std::vector<double> xs;
    for (int i = 0; i < a.x_points; ++i) xs.push_back(a.x_max * i / (a.x_points - 1));
    CsvTable t({"x", "D", "kind", "g", "T", "nbar", "truncation_deficit"});
    for (const auto& k : a.kinds) {
        auto c = mqs_bures_curve(mqs_kind_from_string(k), a.nbar, xs, ctx.epsilon);
        for (const auto& pt : c.points)
            t.add_row({pt.x, pt.D, to_string(c.kind), c.g, pt.T, c.nbar, c.truncation_deficit});
    }
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { t.write(os, ctx.provenance); });
}

// ---- wigner

struct WignerArgs {
    double g = 3.0;
    int input = 1;
    double R = 0.0;
    int points = 121;
    double sigmas = 6.0;
    std::vector<double> window;  // re_min, re_max, im_min, im_max; empty: automatic
    double epsilon_grid = 1e-3;
    std::string json_out;
};

std::string header_path(const WignerArgs& a, const std::string& out) {
    if (!a.json_out.empty()) return a.json_out;
    if (out.empty()) return {};
    std::filesystem::path p(out);
    if (p.extension() == ".json") throw ValidationError("--out names the CSV; pass --json-out for the header");
    return p.replace_extension(".json").string();
}

void run_wigner(const WignerArgs& a, Context& ctx) {
    if (a.input < 0 || a.input > 64) throw ValidationError("--input photon number must lie in [0, 64]");
    if (!(a.R >= 0 && a.R <= 1)) throw ValidationError("--R must lie in [0, 1]");
    if (a.points < 2) throw ValidationError("--points must be at least 2");
    if (!a.window.empty() && a.window.size() != 4)
        throw ValidationError("--window takes re_min,re_max,im_min,im_max");
    const std::string json_path = header_path(a, ctx.out_path);
    if (!json_path.empty() && json_path == ctx.out_path)
        throw ValidationError("--json-out must differ from --out");

    AmplifierParams p(a.g);
    auto in = build_fock(ModeLayout(1, std::max(a.input, 1), 1), Occ{a.input});
    FockState s = degenerate_opa_state(p.g, in, ctx.epsilon);
    DensityOperator rho = a.R > 0 ? lossy_single_mode(s, LossSpec(1 - a.R)) : DensityOperator::from_pure(s);

    GridSpec spec;
    if (a.window.empty()) {
        spec = auto_grid(rho, a.points, a.sigmas);
    } else {
        spec = {a.window[0], a.window[1], a.window[2], a.window[3], a.points, a.points};
    }
    auto grid = wigner_grid(rho, spec, a.epsilon_grid, s.truncation_deficit());
    auto neg = negativity_report(grid);

    json header = {{"grid", grid_json(grid.spec)},
                   {"tail_mass", grid.tail_mass},
                   {"epsilon_grid", grid.epsilon_grid},
                   {"fock_deficit", grid.fock_deficit},
                   {"cutoff", s.layout().cutoff(0)},
                   {"integral", grid.integral()},
                   {"wigner_origin", wigner_origin(rho)},
                   {"negativity",
                    {{"min_value", neg.min_value},
                     {"negative_volume", neg.negative_volume},
                     {"re_at_min", neg.re_at_min},
                     {"im_at_min", neg.im_at_min}}}};

    CsvTable t({"re", "im", "W"});
    for (int i = 0; i < spec.re_points; ++i)
        for (int j = 0; j < spec.im_points; ++j) t.add_row({spec.re(i), spec.im(j), grid.W(i, j)});
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { t.write(os, ctx.provenance, header); });
    if (!json_path.empty())
        emit(json_path, ctx.out, [&](std::ostream& os) { write_json(os, ctx.provenance, header); });
}

// ---- werner

struct WernerArgs {
    double g = 3.0;
    double eta = 1e-4;
    bool oracle = false;
};

void run_werner(const WernerArgs& a, Context& ctx) {
    AmplifierParams p(a.g);
    const double w = werner_weight(p, a.eta);
    Eigen::Matrix4cd rho = werner_extract(p, a.eta);
    auto ppt = ppt_entangled(rho);
    json doc = {{"p", w},
                {"rho", matrix_json(rho)},
                {"ppt", {{"entangled", ppt.entangled}, {"min_eigenvalue", ppt.min_eigenvalue}}}};
    if (a.oracle) {
        auto o = werner_bruteforce(p, a.eta, std::min(ctx.epsilon, 1e-12));
        doc["oracle"] = {{"max_abs_diff", (o.rho - rho).cwiseAbs().maxCoeff()},
                         {"probability", o.probability},
                         {"truncation_deficit", o.truncation_deficit}};
    }
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { write_json(os, ctx.provenance, doc); });
}

// ---- witness

struct WitnessArgs {
    std::vector<double> g{1.0};
    std::vector<double> eta{0.05};
    std::vector<int> k{2};
    std::string config = "collinear";
    std::string mode = "ofilter";
};

void run_witness(const WitnessArgs& a, Context& ctx) {
    if (a.g.empty() || a.eta.empty() || a.k.empty()) throw ValidationError("--g, --eta and --k need values");
    const Config cfg = config_from_string(a.config);
    const bool pseudo = a.mode == "pseudo-spin";
    if (!pseudo && a.mode != "ofilter") throw ValidationError("--mode must be ofilter or pseudo-spin");
    if (pseudo && cfg != Config::collinear) throw ValidationError("pseudo-spin witness needs the collinear source");
    for (double e : a.eta)
        if (!(e > 0 && e <= 1)) throw ValidationError("--eta values must lie in (0, 1]");
    for (int k : a.k)
        if (k < 0) throw ValidationError("--k values must be >= 0");

    CsvTable t({"g", "eta", "k", "V1", "V2", "V3", "S", "conclusive_fraction"});
    auto row = [&](double g, double eta, int k, const WitnessReport& r) {
        t.add_row({g, eta, k, r.V[0], r.V[1], r.V[2], r.S, r.conclusive_fraction});
    };
    for (double g : a.g) {
        AmplifierParams p(g);
        Ensemble joint = micro_macro(p, cfg, ctx.epsilon);
        if (pseudo) {
            // projective on the macro-qubit span: no threshold, no loss
            row(g, 1.0, 0, pseudo_spin_witness(joint, macro_qubit(p, joint.layout.single(1), ctx.epsilon)));
            continue;
        }
        for (double eta : a.eta)
            for (int k : a.k) {
                try {
                    row(g, eta, k, ofilter_witness(joint, k, eta));
                } catch (const DegenerateOutcomeError&) {
                    // nothing conclusive at this point of the sweep
                    WitnessReport r;
                    r.V.fill(std::nan(""));
                    r.S = std::nan("");
                    row(g, eta, k, r);
                }
            }
    }
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { t.write(os, ctx.provenance); });
}

// ---- nosignal

struct NoSignalArgs {
    double g = 1.0;
    std::string config = "collinear";
    std::vector<double> alice1{0.0, 0.0};
    std::vector<double> alice2{M_PI / 2, 0.0};
    std::vector<double> bob_frame{0.0, 0.0};
    int k = 0;
    double eta = 1.0;
    std::string observable = "ofilter";
    long samples = 0;
};

void run_nosignal(const NoSignalArgs& a, Context& ctx) {
    AmplifierParams p(a.g);
    const Config cfg = config_from_string(a.config);
    BobObservable obs;
    if (a.observable == "ofilter")
        obs = BobObservable::ofilter;
    else if (a.observable == "photon-counts")
        obs = BobObservable::photon_counts;
    else
        throw ValidationError("--observable must be ofilter or photon-counts");
    if (a.samples < 0) throw ValidationError("--samples must be >= 0");
    OFilterSpec bob{a.k, frame_from(a.bob_frame, "bob-frame"), a.eta};
    bob.validate();
    auto f1 = frame_from(a.alice1, "alice1"), f2 = frame_from(a.alice2, "alice2");

    Ensemble joint = micro_macro(p, cfg, ctx.epsilon);
    auto r = nosignaling_check(joint, f1, f2, bob, obs);
    json doc = {{"exact",
                 {{"max_deviation", r.max_deviation},
                  {"bob_first", r.bob_first},
                  {"bob_second", r.bob_second},
                  {"conditional_gap", r.conditional_gap}}}};
    if (a.samples > 0) {
        auto mc = nosignaling_monte_carlo(joint, f1, f2, bob, std::size_t(a.samples), ctx.seed);
        doc["monte_carlo"] = {{"samples", mc.samples},     {"seed", ctx.seed},
                              {"p_first", mc.p_first},     {"p_second", mc.p_second},
                              {"standard_error", mc.standard_error}, {"max_abs_z", mc.max_abs_z}};
    }
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { write_json(os, ctx.provenance, doc); });
}

// ---- clone-tables

struct CloneArgs {
    std::string flavor = "universal";
    std::vector<int> n{1};
    int m_max = 10;
};

void run_clone_tables(const CloneArgs& a, Context& ctx) {
    if (a.n.empty()) throw ValidationError("--n needs at least one value");
    CsvTable t({"flavor", "n", "m", "fidelity"});
    for (int n : a.n) {
        if (a.flavor == "unot") {
            t.add_row({"unot", n, n, unot_fidelity(n)});
            continue;
        }
        CloneFlavor fl;
        if (a.flavor == "universal")
            fl = CloneFlavor::universal;
        else if (a.flavor == "phase-covariant" || a.flavor == "phase_covariant" || a.flavor == "pc")
            fl = CloneFlavor::phase_covariant;
        else
            throw ValidationError("--flavor must be universal, phase-covariant or unot");
        if (a.m_max <= n) throw ValidationError("--m-max must exceed every N");
        for (int m = n + 1; m <= a.m_max; ++m) {
            CloningSpec s(n, m, fl);
            double f = fl == CloneFlavor::universal ? universal_clone_fidelity(s) : phase_covariant_fidelity(s);
            t.add_row({to_string(fl), n, m, f});
        }
    }
    emit(ctx.out_path, ctx.out, [&](std::ostream& os) { t.write(os, ctx.provenance); });
}

std::string normalize_key(std::string k) {
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
    return j;
}

// --config-file is needed before parsing so the file can name the command.
std::string find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config-file" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config-file=", 0) == 0) return args[i].substr(14);
    }
    return {};
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"quantum-injected parametric amplifier experiments", "qiopa"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_path, config_path;
    std::uint64_t seed = 1;
    double epsilon = kDefaultEpsilon;
    Command global{&app, {}, {}};
    global.add("out", out_path, "output path (default: standard output)", false);
    global.add("seed", seed, "64-bit seed for every random draw");
    global.add("epsilon-trunc", epsilon, "Fock truncation budget");
    global.add("config-file", config_path, "JSON config; command-line flags override it", false);

    FringeArgs fa;
    BuresArgs ba;
    WignerArgs wa;
    WernerArgs wea;
    WitnessArgs wia;
    NoSignalArgs na;
    CloneArgs ca;
    std::map<std::string, Command> cmds;

    auto make = [&](const std::string& name, const std::string& help) -> Command& {
        Command& c = cmds[name];
        c.app = app.add_subcommand(name, help);
        return c;
    };
    {
        auto& c = make("fringe", "fringe pattern vs injected phase (CSV)");
        c.add("config", fa.config, "collinear or noncollinear");
        c.add("g", fa.g, "gain");
        c.add("phases", fa.phases, "number of phases over [0, 2 pi)");
        c.run = [&](Context& x) { run_fringe(fa, x); };
    }
    {
        auto& c = make("bures", "Bures distance vs x = R nbar after loss (CSV)");
        c.add("kinds", ba.kinds, "comma list of pc, universal, coherent");
        c.add("nbar", ba.nbar, "mean photon number entering the channel");
        c.add("x-max", ba.x_max, "largest x");
        c.add("x-points", ba.x_points, "grid points on [0, x-max]");
        c.run = [&](Context& x) { run_bures(ba, x); };
    }
    {
        auto& c = make("wigner", "Wigner function of the squeezed Fock input after loss (CSV + JSON)");
        c.add("g", wa.g, "squeezing gain");
        c.add("input", wa.input, "photon number of the input Fock state");
        c.add("R", wa.R, "loss reflectivity");
        c.add("points", wa.points, "grid points per axis");
        c.add("sigmas", wa.sigmas, "automatic window half-width in standard deviations");
        c.add("window", wa.window, "re_min,re_max,im_min,im_max (default: automatic)");
        c.add("epsilon-grid", wa.epsilon_grid, "allowed probability outside the window (1 disables)");
        c.add("json-out", wa.json_out, "header path (default: --out with .json)", false);
        c.run = [&](Context& x) { run_wigner(wa, x); };
    }
    {
        auto& c = make("werner", "Werner state extracted from the pair source after loss (JSON)");
        c.add("g", wea.g, "gain");
        c.add("eta", wea.eta, "transmission of each branch");
        c.add("oracle", wea.oracle, "also run the brute-force attenuation pipeline");
        c.run = [&](Context& x) { run_werner(wea, x); };
    }
    {
        auto& c = make("witness", "entanglement witness sweep over g, eta, k (CSV)");
        c.add("g", wia.g, "comma list of gains");
        c.add("eta", wia.eta, "comma list of detection efficiencies");
        c.add("k", wia.k, "comma list of O-filter thresholds");
        c.add("config", wia.config, "collinear or noncollinear");
        c.add("mode", wia.mode, "ofilter or pseudo-spin");
        c.run = [&](Context& x) { run_witness(wia, x); };
    }
    {
        auto& c = make("nosignal", "Bob's marginals under two Alice bases (JSON)");
        c.add("g", na.g, "gain");
        c.add("config", na.config, "collinear or noncollinear");
        c.add("alice1", na.alice1, "first Alice frame theta,phi");
        c.add("alice2", na.alice2, "second Alice frame theta,phi");
        c.add("bob-frame", na.bob_frame, "Bob frame theta,phi");
        c.add("k", na.k, "Bob O-filter threshold");
        c.add("eta", na.eta, "Bob detection efficiency");
        c.add("observable", na.observable, "ofilter or photon-counts");
        c.add("samples", na.samples, "Monte-Carlo samples per Alice basis (0: exact only)");
        c.run = [&](Context& x) { run_nosignal(na, x); };
    }
    {
        auto& c = make("clone-tables", "optimal cloning fidelities over (N, M) (CSV)");
        c.add("flavor", ca.flavor, "universal, phase-covariant or unot");
        c.add("n", ca.n, "comma list of input copies N");
        c.add("m-max", ca.m_max, "largest number of output copies M");
        c.run = [&](Context& x) { run_clone_tables(ca, x); };
    }

    std::string command;
    auto prefix = [&] { return command.empty() ? std::string("qiopa: ") : "qiopa " + command + ": "; };
    try {
        std::vector<std::string> args = args_in;
        json file;
        if (auto cp = find_config_path(args); !cp.empty()) file = load_config(cp);
        if (file.is_object() && file.contains("command")) {
            if (!file["command"].is_string()) throw ValidationError("config 'command' must be a string");
            const std::string fc = file["command"];
            if (!cmds.count(fc)) throw ValidationError("config names unknown command '" + fc + "'");
            auto named = std::find_if(args.begin() + (args.empty() ? 0 : 1), args.end(),
                                      [&](const std::string& s) { return cmds.count(s) > 0; });
            if (named == args.end())
                args.insert(args.begin() + (args.empty() ? 0 : 1), fc);
            else if (*named != fc)
                throw ValidationError("config file is for '" + fc + "' but the command line runs '" + *named + "'");
        }
        std::vector<std::string> rev(args.rbegin(), args.rend());
        if (!rev.empty()) rev.pop_back();  // program name
        app.parse(rev);

        command = app.get_subcommands().front()->get_name();
        Command& cmd = cmds.at(command);

        if (file.is_object())
            for (auto& [k, v] : file.items()) {
                if (k == "command") continue;
                const std::string key = normalize_key(k);
                auto match = [&](Param& p) { return p.key == key; };
                auto it = std::find_if(cmd.params.begin(), cmd.params.end(), match);
                Param* p = it != cmd.params.end() ? &*it : nullptr;
                if (!p) {
                    auto g = std::find_if(global.params.begin(), global.params.end(), match);
                    if (g != global.params.end()) p = &*g;
                }
                if (!p || key == "config-file") throw ValidationError("unknown config key '" + k + "' for " + command);
                if (p->opt->count() == 0) p->set(v);
            }

        require_epsilon(epsilon);
        json echo = {{"command", command}};
        for (auto* list : {&global.params, &cmd.params})
            for (auto& p : *list)
                if (p.echo) echo[p.key] = p.get();
        Context ctx{out_path, seed, epsilon, provenance(command, echo), out};
        cmd.run(ctx);
        return kSuccess;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidation;
    } catch (const ValidationError& e) {
        err << prefix() << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalGuardError& e) {
        err << prefix() << "numerical guard: " << e.what() << '\n';
        return kNumericalGuard;
    } catch (const std::exception& e) {
        err << prefix() << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace qiopa::cli
