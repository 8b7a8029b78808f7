#include "monna/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "monna/errors.hpp"
#include "monna/io.hpp"
#include "monna/node.hpp"

namespace monna {

namespace pt = boost::property_tree;

bool SystemConfig::operator==(const SystemConfig& o) const {
    return n == o.n && f == o.f && iterations == o.iterations && rounds == o.rounds &&
           rounds_theoretical == o.rounds_theoretical && regime == o.regime &&
           regime_auto == o.regime_auto && delta == o.delta && delta_auto == o.delta_auto &&
           rule == o.rule && gamma == o.gamma && beta == o.beta &&
           step_theoretical == o.step_theoretical && attack == o.attack &&
           objective == o.objective && policy == o.policy && seb == o.seb &&
           signatures == o.signatures && seeds == o.seeds && output_dir == o.output_dir &&
           theta0 == o.theta0 && check_invariants == o.check_invariants;
}

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view field) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError(std::string(field), "expected a non-negative integer, got '" + t + "'");
    }
    return v;
}

bool parse_bool(std::string_view text, std::string_view field) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "off" || t == "no") return false;
    throw ConfigError(std::string(field), "expected true or false, got '" + t + "'");
}

std::vector<double> parse_double_list(std::string_view text, std::string_view field) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const std::string item = trim(rest.substr(0, comma));
        if (!item.empty()) out.push_back(parse_double(item, field));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
    std::string out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(seeds[i]);
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"system", {"n", "f", "T", "K", "regime", "delta", "rule"}},
        {"schedule", {"gamma", "beta"}},
        {"attack", {"kind", "zeta_grid"}},
        {"objective",
         {"kind", "dim", "L", "mu", "rotate", "center_norm", "sigma", "noise", "zeta",
          "heterogeneity", "dirichlet_alpha", "samples_per_node", "regularization",
          "class_separation", "seed"}},
        {"network", {"schedule", "seb", "signatures"}},
        {"run", {"seeds", "output_dir", "theta0", "check_invariants"}},
    };
    return keys;
}

bool in_eleven_f(std::size_t n, std::size_t f) { return n >= 11 * f; }
bool in_five_f(std::size_t n, std::size_t f) { return f == 0 || n > 5 * f; }

std::string regime_thresholds(std::size_t n, std::size_t f) {
    return "n = " + std::to_string(n) + ", 11f = " + std::to_string(11 * f) +
           ", 5f = " + std::to_string(5 * f);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text, std::string_view field) {
    std::vector<std::uint64_t> seeds;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const std::string item = trim(rest.substr(0, comma));
        if (!item.empty()) {
            const auto dots = item.find("..");
            if (dots == std::string::npos) {
                seeds.push_back(parse_unsigned(item, field));
            } else {
                const auto lo = parse_unsigned(std::string_view(item).substr(0, dots), field);
                const auto hi = parse_unsigned(std::string_view(item).substr(dots + 2), field);
                if (hi < lo) throw ConfigError(std::string(field), "empty range '" + item + "'");
                if (hi - lo > 100000) throw ConfigError(std::string(field), "range too large");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        }
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (seeds.empty()) throw ConfigError(std::string(field), "no seeds given");
    return seeds;
}

void validate_and_resolve(SystemConfig& c) {
    if (c.n == 0) throw ConfigError("system.n", "must be > 0");
    if (c.f >= c.n) throw ConfigError("system.f", "need n > f >= 0");
    if (!c.rounds_theoretical && c.rounds == 0) {
        throw ConfigError("system.K", "need at least one coordination round");
    }
    if ((c.rule == RuleKind::NNA) && c.n <= 2 * c.f) {
        throw ConfigError("system.rule", "NNA needs n > 2f");
    }
    if (c.rule == RuleKind::CWTM && c.n <= 3 * c.f) {
        throw ConfigError("system.rule", "CWTM over n - f inputs needs n > 3f");
    }
    if (c.seb && c.n <= 3 * c.f) throw ConfigError("network.seb", "SEB needs n > 3f");
    if (c.signatures != "keyed" && c.signatures != "null") {
        throw ConfigError("network.signatures", "expected keyed or null");
    }
    if (c.attack.kind == AttackKind::Custom) {
        throw ConfigError("attack.kind", "custom attacks are only available through the library");
    }
    for (double z : c.attack.zeta_grid) {
        if (!std::isfinite(z)) throw ConfigError("attack.zeta_grid", "entries must be finite");
    }
    if (c.seeds.empty()) throw ConfigError("run.seeds", "no seeds given");
    if (!std::isfinite(c.theta0)) throw ConfigError("run.theta0", "must be finite");

    const ObjectiveSpec& o = c.objective;
    if (o.dim == 0) throw ConfigError("objective.dim", "must be > 0");
    if (!(o.smoothness > 0.0)) throw ConfigError("objective.L", "must be > 0");
    if (o.kind == ObjectiveKind::Quadratic &&
        !(o.strong_convexity > 0.0 && o.strong_convexity <= o.smoothness)) {
        throw ConfigError("objective.mu", "need 0 < mu <= L");
    }
    if (!(o.sigma >= 0.0) || !std::isfinite(o.sigma)) {
        throw ConfigError("objective.sigma", "must be >= 0");
    }
    if (!(o.zeta >= 0.0) || !std::isfinite(o.zeta)) throw ConfigError("objective.zeta", "must be >= 0");
    if (!(o.center_norm >= 0.0)) throw ConfigError("objective.center_norm", "must be >= 0");
    if (!(o.dirichlet_alpha > 0.0)) throw ConfigError("objective.dirichlet_alpha", "must be > 0");
    if (o.samples_per_node == 0) throw ConfigError("objective.samples_per_node", "must be > 0");
    if (!(o.regularization >= 0.0)) throw ConfigError("objective.regularization", "must be >= 0");
    if (o.kind == ObjectiveKind::Quadratic && o.heterogeneity != HeterogeneityKind::CenterSpread) {
        throw ConfigError("objective.heterogeneity", "quadratic objectives use center_spread");
    }
    if (o.kind == ObjectiveKind::Logistic && o.heterogeneity != HeterogeneityKind::DirichletLabels) {
        throw ConfigError("objective.heterogeneity", "logistic objectives use dirichlet_labels");
    }

    // Regime.
    if (c.regime_auto) {
        if (in_eleven_f(c.n, c.f)) {
            c.regime = Regime::ElevenF;
        } else if (in_five_f(c.n, c.f)) {
            c.regime = Regime::FiveF;
        } else {
            c.regime.reset();
        }
    } else if (c.regime) {
        if (*c.regime == Regime::ElevenF && !in_eleven_f(c.n, c.f)) {
            throw RegimeError("system.regime: 11f requested but n < 11f (" +
                              regime_thresholds(c.n, c.f) + ")");
        }
        if (*c.regime == Regime::FiveF && !in_five_f(c.n, c.f)) {
            throw RegimeError("system.regime: 5f requested but n <= 5f (" +
                              regime_thresholds(c.n, c.f) + ")");
        }
    }
    if (c.delta_auto) {
        c.delta = (c.f == 0 || !in_five_f(c.n, c.f)) ? 1.0 : max_five_f_delta(c.n, c.f);
    } else if (c.regime == Regime::FiveF) {
        bound_five_f(c.n, c.f, c.delta);  // throws when out of regime
    }

    const bool wants_theory = c.rounds_theoretical || c.step_theoretical;
    if (wants_theory && !c.regime) {
        throw RegimeError("system.regime: theoretical values need a fault regime (" +
                          regime_thresholds(c.n, c.f) + ")");
    }
    if (c.rounds_theoretical) {
        c.rounds = *c.regime == Regime::ElevenF ? 1 : bound_five_f(c.n, c.f, c.delta).rounds;
    }
    if (c.step_theoretical) {
        if (c.iterations == 0) throw ConfigError("system.T", "theoretical step size needs T > 0");
        const ObjectiveSuite suite = build_objectives(c.objective, c.n - c.f, c.objective.seed);
        const ParamVector theta0(c.objective.dim, c.theta0);
        const double gap = global_loss(suite.locals, theta0) - suite.optimal_loss;
        if (!(gap > 0.0)) {
            throw ConfigError("run.theta0", "theoretical step size needs Q(theta0) > Q*");
        }
        const TheoreticalSchedule ts =
            *c.regime == Regime::ElevenF
                ? theoretical_schedule(suite.smoothness, c.iterations, c.objective.sigma, c.n, c.f, gap)
                : theoretical_schedule_five_f(suite.smoothness, c.iterations, c.objective.sigma, c.n,
                                              c.f, gap, c.delta);
        c.gamma = ts.schedule.gamma;
        c.beta = ts.schedule.beta;
    }
    Schedule s{c.gamma, c.beta, c.rounds, c.iterations};
    validate(s);
}

SystemConfig parse_config_text(std::string_view text) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " +
                                  std::to_string(e.line()) + ")");
    }

    SystemConfig c;
    bool gamma_theory = false;
    bool beta_theory = false;

    for (const auto& [section, body] : tree) {
        const auto known = schema().find(section);
        if (known == schema().end()) {
            throw ConfigError(section, "unknown section");
        }
        if (!body.data().empty()) throw ConfigError(section, "key outside of a section");
        for (const auto& [key, node] : body) {
            const std::string field = section + "." + key;
            if (!known->second.count(key)) throw ConfigError(field, "unknown key");
            const std::string v = trim(node.data());
            auto num = [&] { return parse_double(v, field); };
            auto count = [&] { return static_cast<std::size_t>(parse_unsigned(v, field)); };

            if (section == "system") {
                if (key == "n") c.n = count();
                else if (key == "f") c.f = count();
                else if (key == "T") c.iterations = count();
                else if (key == "K") {
                    c.rounds_theoretical = v == "theoretical";
                    if (!c.rounds_theoretical) c.rounds = count();
                } else if (key == "regime") {
                    c.regime_auto = v == "auto";
                    if (v == "none") c.regime.reset();
                    else if (!c.regime_auto) {
                        try {
                            c.regime = parse_regime(v);
                        } catch (const ConfigError&) {
                            throw ConfigError(field, "expected auto, 11f, 5f or none");
                        }
                    }
                } else if (key == "delta") {
                    c.delta_auto = v == "auto";
                    if (!c.delta_auto) c.delta = num();
                } else if (key == "rule") {
                    try {
                        c.rule = parse_rule_kind(v);
                    } catch (const Error& e) {
                        throw ConfigError(field, e.what());
                    }
                }
            } else if (section == "schedule") {
                if (key == "gamma") {
                    gamma_theory = v == "theoretical";
                    if (!gamma_theory) c.gamma = num();
                } else {
                    beta_theory = v == "theoretical";
                    if (!beta_theory) c.beta = num();
                }
            } else if (section == "attack") {
                if (key == "kind") c.attack.kind = parse_attack_kind(v);
                else c.attack.zeta_grid = parse_double_list(v, field);
            } else if (section == "objective") {
                ObjectiveSpec& o = c.objective;
                try {
                    if (key == "kind") o.kind = parse_objective_kind(v);
                    else if (key == "dim") o.dim = count();
                    else if (key == "L") o.smoothness = num();
                    else if (key == "mu") o.strong_convexity = num();
                    else if (key == "rotate") o.rotate = parse_bool(v, field);
                    else if (key == "center_norm") o.center_norm = num();
                    else if (key == "sigma") o.sigma = num();
                    else if (key == "noise") o.noise = parse_noise_kind(v);
                    else if (key == "zeta") o.zeta = num();
                    else if (key == "heterogeneity") o.heterogeneity = parse_heterogeneity_kind(v);
                    else if (key == "dirichlet_alpha") o.dirichlet_alpha = num();
                    else if (key == "samples_per_node") o.samples_per_node = count();
                    else if (key == "regularization") o.regularization = num();
                    else if (key == "class_separation") o.class_separation = num();
                    else if (key == "seed") o.seed = parse_unsigned(v, field);
                } catch (const ConfigError& e) {
                    if (e.field() == field) throw;
                    throw ConfigError(field, e.what());
                }
            } else if (section == "network") {
                if (key == "schedule") {
                    try {
                        c.policy = parse_delivery_policy(v);
                    } catch (const ConfigError& e) {
                        throw ConfigError(field, e.what());
                    }
                } else if (key == "seb") c.seb = parse_bool(v, field);
                else c.signatures = v;
            } else if (section == "run") {
                if (key == "seeds") c.seeds = parse_seed_list(v, field);
                else if (key == "output_dir") c.output_dir = v;
                else if (key == "theta0") c.theta0 = num();
                else c.check_invariants = parse_bool(v, field);
            }
        }
    }

    if (gamma_theory != beta_theory) {
        throw ConfigError(gamma_theory ? "schedule.beta" : "schedule.gamma",
                          "gamma and beta must both be theoretical or both explicit");
    }
    c.step_theoretical = gamma_theory && beta_theory;
    validate_and_resolve(c);
    return c;
}

SystemConfig parse_and_validate(const std::filesystem::path& path) {
    return parse_config_text(read_text(path));
}

std::string emit_config(const SystemConfig& c) {
    std::ostringstream out;
    const ObjectiveSpec& o = c.objective;
    out << "[system]\n"
        << "n = " << c.n << "\n"
        << "f = " << c.f << "\n"
        << "T = " << c.iterations << "\n"
        << "K = " << (c.rounds_theoretical ? std::string("theoretical") : std::to_string(c.rounds))
        << "\n"
        << "regime = "
        << (c.regime_auto ? std::string("auto")
                          : (c.regime ? std::string(to_string(*c.regime)) : std::string("none")))
        << "\n"
        << "delta = " << (c.delta_auto ? std::string("auto") : format_double(c.delta)) << "\n"
        << "rule = " << to_string(c.rule) << "\n\n";
    out << "[schedule]\n";
    if (c.step_theoretical) {
        out << "gamma = theoretical\nbeta = theoretical\n\n";
    } else {
        out << "gamma = " << format_double(c.gamma) << "\n"
            << "beta = " << format_double(c.beta) << "\n\n";
    }
    out << "[attack]\n"
        << "kind = " << to_string(c.attack.kind) << "\n";
    if (!c.attack.zeta_grid.empty()) out << "zeta_grid = " << join_doubles(c.attack.zeta_grid) << "\n";
    out << "\n[objective]\n"
        << "kind = " << to_string(o.kind) << "\n"
        << "dim = " << o.dim << "\n"
        << "L = " << format_double(o.smoothness) << "\n"
        << "mu = " << format_double(o.strong_convexity) << "\n"
        << "rotate = " << (o.rotate ? "true" : "false") << "\n"
        << "center_norm = " << format_double(o.center_norm) << "\n"
        << "sigma = " << format_double(o.sigma) << "\n"
        << "noise = " << to_string(o.noise) << "\n"
        << "zeta = " << format_double(o.zeta) << "\n"
        << "heterogeneity = " << to_string(o.heterogeneity) << "\n"
        << "dirichlet_alpha = " << format_double(o.dirichlet_alpha) << "\n"
        << "samples_per_node = " << o.samples_per_node << "\n"
        << "regularization = " << format_double(o.regularization) << "\n"
        << "class_separation = " << format_double(o.class_separation) << "\n"
        << "seed = " << o.seed << "\n\n";
    out << "[network]\n"
        << "schedule = " << to_string(c.policy) << "\n"
        << "seb = " << (c.seb ? "true" : "false") << "\n"
        << "signatures = " << c.signatures << "\n\n";
    out << "[run]\n"
        << "seeds = " << join_seeds(c.seeds) << "\n"
        << "output_dir = " << c.output_dir << "\n"
        << "theta0 = " << format_double(c.theta0) << "\n"
        << "check_invariants = " << (c.check_invariants ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace monna
