#pragma once

// Command-line driver. Lives in a header so tests can run commands in-process.
//
// Reports are JSON (schema "v1") plus CSV tables, written atomically into the
// --out directory. Exit codes: 0 success, 2 invalid input, 3 resource cap hit
// (a report flagged "partial": true is still written), 1 anything else.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "ratmap.hpp"
#include "spectral.hpp"
#include "toric.hpp"

namespace rzdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitCapacity = 3;

struct RunConfig {
    std::string command;
    std::string matrix;    // "a,b,c,d"
    std::string map_path;
    std::string degrees;   // comma-separated, for fit / recurrence
    unsigned n_max = 8;
    std::size_t depth = 4;
    std::optional<std::size_t> cap;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::optional<double> lambda1;
    std::optional<double> lambda2;
};

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << content;
        if (!f) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline MonomialMatrix parse_matrix(const std::string& text) {
    std::vector<long long> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(item, &used));
            if (used != item.size()) throw ValidationError("");
        } catch (const std::exception&) {
            throw ValidationError("matrix entries must be integers: '" + text + "'");
        }
    }
    if (v.size() != 4) throw ValidationError("matrix needs four comma-separated entries a,b,c,d");
    MonomialMatrix A{v[0], v[1], v[2], v[3]};
    A.require_dominant();
    return A;
}

inline std::vector<long long> parse_degrees(const std::string& text) {
    std::vector<long long> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(item, &used));
            if (used != item.size()) throw ValidationError("");
        } catch (const std::exception&) {
            throw ValidationError("degrees must be comma-separated integers: '" + text + "'");
        }
    }
    if (v.empty()) throw ValidationError("no degrees given");
    return v;
}

inline std::string degrees_csv(const std::vector<long long>& degs) {
    std::string s = "n,deg\n";
    for (std::size_t i = 0; i < degs.size(); ++i) s += std::to_string(i + 1) + "," + std::to_string(degs[i]) + "\n";
    return s;
}

inline std::string residuals_csv(const std::vector<long long>& degs, const FitReport& fit) {
    std::string s = "n,deg,b_lambda1_n,residual,lambda2_half_n\n";
    for (std::size_t i = 0; i < degs.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        s += std::to_string(i + 1) + "," + std::to_string(degs[i]) + ",";
        if (fit.b)
            s += format_double(*fit.b * std::pow(fit.lambda1, n)) + "," + format_double(fit.residuals[i]);
        else
            s += ",";
        s += "," + format_double(std::pow(fit.lambda2, n / 2)) + "\n";
    }
    return s;
}

inline nlohmann::json labelled(nlohmann::json value, const std::string& provenance) {
    return {{"value", std::move(value)}, {"provenance", provenance}};
}

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j{{"command", c.command}, {"n", c.n_max}, {"depth", c.depth}, {"seed", c.seed}};
    if (!c.matrix.empty()) j["matrix"] = c.matrix;
    if (!c.map_path.empty()) j["map"] = std::filesystem::path(c.map_path).filename().string();
    if (!c.degrees.empty()) j["degrees"] = c.degrees;
    j["cap"] = c.cap ? nlohmann::json(*c.cap) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json base_report(const RunConfig& c) {
    return {{"schema", "v1"}, {"config", config_json(c)}, {"seed", c.seed}, {"partial", false}};
}

/// Files produced by one command, written together at the end.
struct Outputs {
    nlohmann::json report;
    std::optional<std::string> degrees_csv;
    std::optional<std::string> residuals_csv;

    void write(const std::string& dir) const {
        const std::filesystem::path d(dir);
        if (degrees_csv) write_atomic(d / "degrees.csv", *degrees_csv);
        if (residuals_csv) write_atomic(d / "residuals.csv", *residuals_csv);
        write_atomic(d / "report.json", report.dump(2) + "\n");
    }
};

/// Thrown when a cap interrupts a command; the outputs gathered so far are still written.
struct PartialRun {
    Outputs outputs;
    std::string message;
};

inline void add_degree_analysis(Outputs& o, const std::vector<long long>& degs, std::optional<double> exact_lambda1,
                                double lambda2, const std::string& lambda2_provenance) {
    o.report["degrees"] = labelled(degs, "exact");
    o.report["stability"] = to_json(stability_report(degs));
    const Lambda1Estimate est = lambda1_from_degrees(degs);
    o.report["lambda1_from_degrees"] = {{"value", est.value}, {"provenance", "fitted"}, {"method", est.provenance}};
    o.report["recurrence"] = labelled(recurrence_json(est.recurrence), "exact");
    if (est.recurrence && degs.size() >= est.recurrence->size())
        o.report["recurrence_next"] = to_string(predict_next(*est.recurrence, degs));
    const double l1 = exact_lambda1.value_or(est.value);
    o.report["lambda1_squared_at_least_lambda2"] = l1 * l1 >= lambda2 - 1e-6;
    if (degs.size() >= 6) {
        const FitReport fit = fit_main_theorem(degs, l1, lambda2);
        nlohmann::json f = to_json(fit);
        f["provenance"] = "fitted";
        f["lambda1_provenance"] = exact_lambda1 ? "exact" : "fitted";
        f["lambda2_provenance"] = lambda2_provenance;
        o.report["fit"] = f;
        o.report["hypothesis_ok"] = fit.hypothesis_ok;
        if (!fit.hypothesis_ok)
            o.report["diagnostic"] = fit.diverging
                                         ? "lambda1^2 <= lambda2 and deg_n / lambda1^n keeps growing; no constant b"
                                         : "lambda1^2 <= lambda2; b is descriptive only";
        o.residuals_csv = residuals_csv(degs, fit);
    } else {
        o.report["fit"] = nullptr;
        o.report["hypothesis_ok"] = l1 * l1 > lambda2 + 1e-9;
    }
    o.degrees_csv = degrees_csv(degs);
}

inline nlohmann::json tower_json(const MonomialMatrix& A, std::size_t depth, std::size_t ray_cap, std::uint64_t seed) {
    const ToricTower t = build_tower(A, depth, ray_cap);
    RhoOptions opt;
    opt.exact_max_size = 40;
    const SpectralData s = rho_tower(t, opt);
    nlohmann::json j = to_json(s);
    j["provenance"] = "numeric";
    nlohmann::json res = nlohmann::json::array();
    for (std::size_t k = 0; k < s.levels.size(); ++k) {
        const EigenResidual e = eigenclass_residual(t, s, k);
        res.push_back({{"level", k}, {"max_level_coordinate", e.max_level_k}, {"max_coordinate", e.max_all}});
    }
    j["eigen_residuals"] = res;
    j["identity_suite"] = to_json(spectral_identity_suite(t, &s, seed));
    return j;
}

inline Outputs cmd_analyze_monomial(const RunConfig& c) {
    const MonomialMatrix A = parse_matrix(c.matrix);
    Outputs o{base_report(c), std::nullopt, std::nullopt};
    const double l1 = spectral_radius(A);
    const long long l2 = std::llabs(A.determinant());
    o.report["lambda1"] = labelled(l1, "exact");
    o.report["lambda2"] = labelled(l2, "exact");
    const std::size_t cap = c.cap.value_or(kDefaultRayCap);
    std::vector<long long> degs;
    try {
        degs = toric_degree_sequence(A, c.n_max, cap);
    } catch (const CapacityError& e) {
        o.report["partial"] = true;
        o.report["degrees"] = labelled(e.partial(), "exact");
        o.report["error"] = e.what();
        o.degrees_csv = degrees_csv(e.partial());
        throw PartialRun{o, e.what()};
    }
    add_degree_analysis(o, degs, l1, static_cast<double>(l2), "exact");
    try {
        o.report["tower"] = tower_json(A, c.depth, cap, c.seed);
        o.report["rho_seq"] = labelled(o.report["tower"]["rho_seq"], "numeric");
        o.report["identity_suite"] = o.report["tower"]["identity_suite"];
    } catch (const CapacityError& e) {
        o.report["partial"] = true;
        o.report["tower"] = nullptr;
        o.report["error"] = e.what();
        throw PartialRun{o, e.what()};
    }
    return o;
}

inline Outputs cmd_tower(const RunConfig& c) {
    const MonomialMatrix A = parse_matrix(c.matrix);
    Outputs o{base_report(c), std::nullopt, std::nullopt};
    o.report["lambda1"] = labelled(spectral_radius(A), "exact");
    o.report["lambda2"] = labelled(std::llabs(A.determinant()), "exact");
    try {
        o.report["tower"] = tower_json(A, c.depth, c.cap.value_or(kDefaultRayCap), c.seed);
    } catch (const CapacityError& e) {
        o.report["partial"] = true;
        o.report["tower"] = nullptr;
        o.report["error"] = e.what();
        throw PartialRun{o, e.what()};
    }
    return o;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open map file '" + path + "'");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON in '") + path + "': " + e.what());
    }
}

inline Outputs cmd_analyze_ratmap(const RunConfig& c) {
    if (c.map_path.empty()) throw ValidationError("--map is required");
    const MapSpec spec = map_spec_from_json(read_json_file(c.map_path));
    const HomMap& f = *spec.map;
    require_dominant(f, c.seed);
    Outputs o{base_report(c), std::nullopt, std::nullopt};
    o.report["map"] = to_json(f);
    if (!spec.name.empty()) o.report["name"] = spec.name;

    TopologicalDegree td;
    if (spec.topological_degree)
        td = topological_degree_user(*spec.topological_degree);
    else if (spec.monomial)
        td = topological_degree(*spec.monomial);
    else
        td = topological_degree_fiber(f, c.seed);
    o.report["lambda2"] = {{"value", td.value}, {"provenance", td.provenance}, {"seed", td.seed}, {"attempts", td.attempts}};
    std::optional<double> exact_l1;
    if (spec.monomial) {
        exact_l1 = spectral_radius(*spec.monomial);
        o.report["lambda1"] = labelled(*exact_l1, "exact");
    }

    std::vector<long long> degs;
    try {
        degs = degree_sequence(f, c.n_max, c.cap.value_or(kDefaultTermCap));
    } catch (const CapacityError& e) {
        o.report["partial"] = true;
        o.report["degrees"] = labelled(e.partial(), "exact");
        o.report["error"] = e.what();
        o.degrees_csv = degrees_csv(e.partial());
        throw PartialRun{o, e.what()};
    }
    add_degree_analysis(o, degs, exact_l1, static_cast<double>(td.value), td.provenance);
    if (!exact_l1) o.report["lambda1"] = o.report["lambda1_from_degrees"];
    return o;
}

inline Outputs cmd_fit(const RunConfig& c) {
    const auto degs = parse_degrees(c.degrees);
    if (!c.lambda1 || !c.lambda2) throw ValidationError("fit needs --lambda1 and --lambda2");
    Outputs o{base_report(c), std::nullopt, std::nullopt};
    const FitReport fit = fit_main_theorem(degs, *c.lambda1, *c.lambda2);
    o.report["degrees"] = labelled(degs, "exact");
    nlohmann::json f = to_json(fit);
    f["provenance"] = "fitted";
    f["lambda1_provenance"] = "user";
    f["lambda2_provenance"] = "user";
    o.report["fit"] = f;
    o.residuals_csv = residuals_csv(degs, fit);
    return o;
}

inline Outputs cmd_recurrence(const RunConfig& c) {
    const auto degs = parse_degrees(c.degrees);
    Outputs o{base_report(c), std::nullopt, std::nullopt};
    o.report["degrees"] = labelled(degs, "exact");
    const auto rec = detect_recurrence(degs);
    o.report["recurrence"] = labelled(recurrence_json(rec), "exact");
    if (rec) {
        o.report["next"] = to_string(predict_next(*rec, degs));
        if (const auto root = recurrence_root(*rec)) o.report["growth_root"] = labelled(root->mid(), "exact");
    }
    return o;
}

/// Parses arguments and runs one command. Human-readable messages go to out/err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Degree growth and dynamical degrees of rational surface maps"};
    app.require_subcommand(1);
    RunConfig c;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", c.seed, "Random seed (recorded in every report)");
        sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    };
    auto* mono = app.add_subcommand("analyze-monomial", "Degrees, tower spectra and fit for a monomial map");
    mono->add_option("-A", c.matrix, "Exponent matrix a,b,c,d")->required();
    mono->add_option("-n", c.n_max, "Number of iterates")->capture_default_str();
    mono->add_option("--depth", c.depth, "Tower depth")->capture_default_str();
    mono->add_option("--cap", c.cap, "Ray cap for fan refinement");
    common(mono);

    auto* rm = app.add_subcommand("analyze-ratmap", "Degrees, stability and fit for a map given by components");
    rm->add_option("--map", c.map_path, "Map JSON file")->required();
    rm->add_option("-n", c.n_max, "Number of iterates")->capture_default_str();
    rm->add_option("--cap", c.cap, "Term cap for composition");
    common(rm);

    auto* tw = app.add_subcommand("tower", "Spectral radii along the refinement tower of a monomial map");
    tw->add_option("-A", c.matrix, "Exponent matrix a,b,c,d")->required();
    tw->add_option("--depth", c.depth, "Tower depth")->capture_default_str();
    tw->add_option("--cap", c.cap, "Ray cap for fan refinement");
    common(tw);

    auto* ft = app.add_subcommand("fit", "Fit deg_n = b lambda1^n + O(lambda2^(n/2))");
    ft->add_option("--degrees", c.degrees, "Comma-separated degrees")->required();
    ft->add_option("--lambda1", c.lambda1, "First dynamical degree")->required();
    ft->add_option("--lambda2", c.lambda2, "Topological degree")->required();
    common(ft);

    auto* rc = app.add_subcommand("recurrence", "Minimal linear recurrence of a degree sequence");
    rc->add_option("--degrees", c.degrees, "Comma-separated degrees")->required();
    common(rc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    c.command = app.get_subcommands().front()->get_name();
    if (c.n_max == 0) {
        err << "error: -n must be positive\n";
        return kExitInvalid;
    }
    if (c.cap && *c.cap == 0) {
        err << "error: --cap must be positive\n";
        return kExitInvalid;
    }

    try {
        Outputs o;
        if (c.command == "analyze-monomial")
            o = cmd_analyze_monomial(c);
        else if (c.command == "analyze-ratmap")
            o = cmd_analyze_ratmap(c);
        else if (c.command == "tower")
            o = cmd_tower(c);
        else if (c.command == "fit")
            o = cmd_fit(c);
        else
            o = cmd_recurrence(c);
        o.write(c.out);
        out << "wrote " << (std::filesystem::path(c.out) / "report.json").string() << "\n";
        return kExitOk;
    } catch (const PartialRun& partial) {
        partial.outputs.write(c.out);
        err << "capacity: " << partial.message << " (partial report written)\n";
        return kExitCapacity;
    } catch (const CapacityError& e) {
        err << "capacity: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DominanceError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const InsufficientData& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace rzdyn::cli
