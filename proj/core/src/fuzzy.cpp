#include "aivsim/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aivsim::fuzzy {

namespace {

void require_finite(std::initializer_list<double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError(std::string(what) + ": non-finite parameter");
        }
    }
}

}  // namespace

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
    require_finite({a, b, c}, "triangular");
    if (!(a <= b && b <= c)) {
        throw ConfigError("triangular: expected a <= b <= c");
    }
    return MembershipFunction(Kind::Triangular, {a, b, b, c});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
    require_finite({a, b, c, d}, "trapezoidal");
    if (!(a <= b && b <= c && c <= d)) {
        throw ConfigError("trapezoidal: expected a <= b <= c <= d");
    }
    return MembershipFunction(Kind::Trapezoidal, {a, b, c, d});
}

double MembershipFunction::degree(double x) const {
    const auto [a, b, c, d] = p_;
    if (x < a || x > d) {
        return 0.0;
    }
    if (x < b) {
        return (x - a) / (b - a);
    }
    if (x > c) {
        return (d - x) / (d - c);
    }
    return 1.0;
}

MembershipFunction MembershipFunction::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw ConfigError("membership scale factor must be positive");
    }
    auto p = p_;
    for (auto& v : p) {
        v *= factor;
    }
    return MembershipFunction(kind_, p);
}

double membership_degree(const MembershipFunction& mf, double x) { return mf.degree(x); }

LinguisticVariable::LinguisticVariable(std::string name, double lo, double hi,
                                       std::vector<Term> terms, std::string unit)
    : name_(std::move(name)), lo_(lo), hi_(hi), unit_(std::move(unit)), terms_(std::move(terms)) {
    if (name_.empty()) {
        throw ConfigError("linguistic variable without a name");
    }
    if (!(std::isfinite(lo_) && std::isfinite(hi_) && lo_ < hi_)) {
        throw ConfigError(name_ + ": universe must satisfy lo < hi");
    }
    if (terms_.empty()) {
        throw ConfigError(name_ + ": no terms");
    }
    std::set<std::string> labels;
    // Candidate points: every breakpoint plus midpoints between consecutive
    // ones. Degrees are linear in between, so this checks coverage exactly.
    std::vector<double> marks{lo_, hi_};
    const double slack = 1e-9 * (hi_ - lo_);
    for (const auto& term : terms_) {
        if (!labels.insert(term.label).second) {
            throw ConfigError(name_ + ": duplicate term '" + term.label + "'");
        }
        if (term.mf.support_lo() < lo_ - slack || term.mf.support_hi() > hi_ + slack) {
            throw ConfigError(name_ + ": term '" + term.label + "' leaves the universe");
        }
        for (double p : term.mf.breakpoints()) {
            marks.push_back(std::clamp(p, lo_, hi_));
        }
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    std::vector<double> probes = marks;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        probes.push_back(0.5 * (marks[i] + marks[i + 1]));
    }
    for (double x : probes) {
        const bool covered = std::any_of(terms_.begin(), terms_.end(),
                                         [x](const Term& t) { return t.mf.degree(x) > 0.0; });
        if (!covered) {
            std::ostringstream os;
            os << name_ << ": no term covers x=" << x;
            throw ConfigError(os.str());
        }
    }
}

std::optional<std::size_t> LinguisticVariable::term_index(std::string_view label) const {
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].label == label) {
            return i;
        }
    }
    return std::nullopt;
}

double LinguisticVariable::clamp(double x) const {
    if (std::isnan(x)) {
        throw ConfigError(name_ + ": NaN input");
    }
    return std::clamp(x, lo_, hi_);
}

std::vector<double> LinguisticVariable::degrees(double x) const {
    const double cx = clamp(x);
    std::vector<double> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        out.push_back(t.mf.degree(cx));
    }
    return out;
}

TermDegrees fuzzify(const LinguisticVariable& var, double x) {
    const auto d = var.degrees(x);
    TermDegrees out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        out.emplace(var.terms()[i].label, d[i]);
    }
    return out;
}

double rule_activation(const FuzzyRule& rule, const FuzzifiedInputs& fuzzified) {
    if (rule.antecedents.empty()) {
        throw ConfigError("rule without antecedents");
    }
    double strength = 1.0;
    for (const auto& clause : rule.antecedents) {
        const auto var = fuzzified.find(clause.variable);
        if (var == fuzzified.end()) {
            throw ConfigError("unknown variable '" + clause.variable + "'");
        }
        const auto term = var->second.find(clause.term);
        if (term == var->second.end()) {
            throw ConfigError("unknown term '" + clause.term + "' of '" + clause.variable + "'");
        }
        strength = std::min(strength, term->second);
    }
    return strength;
}

double AggregatedSet::abscissa(std::size_t i) const {
    if (degrees.size() < 2) {
        return 0.5 * (lo + hi);
    }
    const auto n = static_cast<double>(degrees.size() - 1);
    return lo + (hi - lo) * (static_cast<double>(i) / n);
}

bool AggregatedSet::all_zero() const {
    return std::all_of(degrees.begin(), degrees.end(), [](double d) { return d <= 0.0; });
}

double defuzzify_centroid(const AggregatedSet& agg) {
    const std::size_t n = agg.degrees.size();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 * agg.degrees[i] : agg.degrees[i];
        num += w * agg.abscissa(i);
        den += w;
    }
    if (!(den > 0.0)) {
        throw NoRuleFired("aggregated output set is empty");
    }
    return std::clamp(num / den, agg.lo, agg.hi);
}

FuzzyModel::FuzzyModel(std::string name, std::vector<LinguisticVariable> inputs,
                       LinguisticVariable output, std::vector<FuzzyRule> rules, int resolution)
    : name_(std::move(name)),
      inputs_(std::move(inputs)),
      output_(std::move(output)),
      rules_(std::move(rules)),
      resolution_(resolution) {
    if (inputs_.empty()) {
        throw ConfigError(name_ + ": model has no inputs");
    }
    if (rules_.empty()) {
        throw ConfigError(name_ + ": empty rule base");
    }
    if (resolution_ < 2) {
        throw ConfigError(name_ + ": resolution must be at least 2");
    }
    std::set<std::string> names;
    for (const auto& v : inputs_) {
        if (!names.insert(v.name()).second) {
            throw ConfigError(name_ + ": duplicate input '" + v.name() + "'");
        }
    }
    for (const auto& rule : rules_) {
        if (rule.antecedents.empty()) {
            throw ConfigError(name_ + ": rule without antecedents");
        }
        ResolvedRule resolved{};
        std::set<std::size_t> seen;
        for (const auto& clause : rule.antecedents) {
            const auto it = std::find_if(inputs_.begin(), inputs_.end(),
                                         [&](const auto& v) { return v.name() == clause.variable; });
            if (it == inputs_.end()) {
                throw ConfigError(name_ + ": rule references unknown input '" + clause.variable + "'");
            }
            const auto vi = static_cast<std::size_t>(it - inputs_.begin());
            const auto ti = it->term_index(clause.term);
            if (!ti) {
                throw ConfigError(name_ + ": unknown term '" + clause.term + "' of '" +
                                  clause.variable + "'");
            }
            if (!seen.insert(vi).second) {
                throw ConfigError(name_ + ": rule repeats input '" + clause.variable + "'");
            }
            resolved.antecedents.emplace_back(vi, *ti);
        }
        if (rule.consequent.variable != output_.name()) {
            throw ConfigError(name_ + ": consequent must target '" + output_.name() + "'");
        }
        const auto ci = output_.term_index(rule.consequent.term);
        if (!ci) {
            throw ConfigError(name_ + ": unknown output term '" + rule.consequent.term + "'");
        }
        resolved.consequent_term = *ci;
        resolved_.push_back(std::move(resolved));
    }

    AggregatedSet grid{output_.lo(), output_.hi(),
                       std::vector<double>(static_cast<std::size_t>(resolution_), 0.0)};
    for (const auto& term : output_.terms()) {
        std::vector<double> samples(grid.degrees.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            samples[i] = term.mf.degree(grid.abscissa(i));
        }
        consequent_samples_.push_back(std::move(samples));
    }
}

const LinguisticVariable& FuzzyModel::input(std::string_view name) const {
    for (const auto& v : inputs_) {
        if (v.name() == name) {
            return v;
        }
    }
    throw ConfigError(name_ + ": no input named '" + std::string(name) + "'");
}

std::vector<double> FuzzyModel::ordered(const CrispInputs& inputs) const {
    std::vector<double> values;
    values.reserve(inputs_.size());
    for (const auto& v : inputs_) {
        const auto it = inputs.find(v.name());
        if (it == inputs.end()) {
            throw ConfigError(name_ + ": missing input '" + v.name() + "'");
        }
        values.push_back(it->second);
    }
    return values;
}

std::vector<double> FuzzyModel::activations_ordered(std::span<const double> values) const {
    if (values.size() != inputs_.size()) {
        throw ConfigError(name_ + ": expected " + std::to_string(inputs_.size()) + " inputs");
    }
    std::vector<std::vector<double>> degrees;
    degrees.reserve(inputs_.size());
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        degrees.push_back(inputs_[i].degrees(values[i]));
    }
    std::vector<double> out;
    out.reserve(resolved_.size());
    for (const auto& rule : resolved_) {
        double strength = 1.0;
        for (const auto& [vi, ti] : rule.antecedents) {
            strength = std::min(strength, degrees[vi][ti]);
        }
        out.push_back(strength);
    }
    return out;
}

std::vector<double> FuzzyModel::activations(const CrispInputs& inputs) const {
    const auto values = ordered(inputs);
    return activations_ordered(values);
}

AggregatedSet FuzzyModel::aggregate(const std::vector<double>& activations) const {
    if (activations.size() != resolved_.size()) {
        throw ConfigError(name_ + ": activation count does not match rule count");
    }
    // Strongest activation per consequent term first; clipping is then one
    // pass per distinct term instead of one per rule.
    std::vector<double> per_term(output_.terms().size(), 0.0);
    for (std::size_t r = 0; r < resolved_.size(); ++r) {
        auto& slot = per_term[resolved_[r].consequent_term];
        slot = std::max(slot, std::clamp(activations[r], 0.0, 1.0));
    }
    AggregatedSet agg{output_.lo(), output_.hi(),
                      std::vector<double>(static_cast<std::size_t>(resolution_), 0.0)};
    for (std::size_t t = 0; t < per_term.size(); ++t) {
        const double alpha = per_term[t];
        if (alpha <= 0.0) {
            continue;
        }
        const auto& samples = consequent_samples_[t];
        for (std::size_t i = 0; i < samples.size(); ++i) {
            agg.degrees[i] = std::max(agg.degrees[i], std::min(alpha, samples[i]));
        }
    }
    return agg;
}

AggregatedSet FuzzyModel::infer(const CrispInputs& inputs) const {
    return aggregate(activations(inputs));
}

double FuzzyModel::evaluate(const CrispInputs& inputs) const {
    return defuzzify_centroid(infer(inputs));
}

double FuzzyModel::evaluate(std::span<const double> ordered_inputs) const {
    return defuzzify_centroid(aggregate(activations_ordered(ordered_inputs)));
}

std::optional<double> FuzzyModel::try_evaluate(const CrispInputs& inputs) const {
    try {
        return evaluate(inputs);
    } catch (const NoRuleFired&) {
        return std::nullopt;
    }
}

std::vector<std::vector<double>> FuzzyModel::uncovered_points(int points_per_input) const {
    if (points_per_input < 2) {
        throw ConfigError("uncovered_points: need at least 2 points per input");
    }
    std::vector<std::vector<double>> axes;
    for (const auto& v : inputs_) {
        std::vector<double> axis;
        for (int k = 0; k < points_per_input; ++k) {
            axis.push_back(v.lo() + (v.hi() - v.lo()) * k / (points_per_input - 1));
        }
        axes.push_back(std::move(axis));
    }
    std::vector<std::vector<double>> uncovered;
    std::vector<std::size_t> idx(inputs_.size(), 0);
    std::vector<double> point(inputs_.size());
    while (true) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            point[i] = axes[i][idx[i]];
        }
        const auto acts = activations_ordered(point);
        if (std::none_of(acts.begin(), acts.end(), [](double a) { return a > 0.0; })) {
            uncovered.push_back(point);
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == axes[d].size()) {
            idx[d] = 0;
            ++d;
        }
        if (d == idx.size()) {
            break;
        }
    }
    return uncovered;
}

namespace {

using nlohmann::json;

MembershipFunction parse_mf(const json& j, const std::string& where) {
    const auto kind = j.at("kind").get<std::string>();
    const auto params = j.at("params").get<std::vector<double>>();
    if (kind == "triangular") {
        if (params.size() != 3) {
            throw ConfigError(where + ": triangular takes 3 params");
        }
        return MembershipFunction::triangular(params[0], params[1], params[2]);
    }
    if (kind == "trapezoidal") {
        if (params.size() != 4) {
            throw ConfigError(where + ": trapezoidal takes 4 params");
        }
        return MembershipFunction::trapezoidal(params[0], params[1], params[2], params[3]);
    }
    throw ConfigError(where + ": unknown membership kind '" + kind + "'");
}

LinguisticVariable parse_variable(const json& j, const ScaleBindings& bindings) {
    const auto name = j.at("name").get<std::string>();
    const auto universe = j.at("universe").get<std::vector<double>>();
    if (universe.size() != 2) {
        throw ConfigError(name + ": universe must be [lo, hi]");
    }
    double scale = 1.0;
    if (j.contains("scale_to")) {
        const auto key = j.at("scale_to").get<std::string>();
        const auto it = bindings.find(key);
        if (it == bindings.end()) {
            throw ConfigError(name + ": unbound scale '" + key + "'");
        }
        scale = it->second;
        if (!(scale > 0.0)) {
            throw ConfigError(name + ": scale '" + key + "' must be positive");
        }
    }
    std::vector<Term> terms;
    for (const auto& t : j.at("terms")) {
        const auto label = t.at("label").get<std::string>();
        auto mf = parse_mf(t, name + "." + label);
        terms.push_back({label, scale == 1.0 ? mf : mf.scaled(scale)});
    }
    return LinguisticVariable(name, universe[0] * scale, universe[1] * scale, std::move(terms),
                              j.value("unit", std::string{}));
}

Clause parse_clause(const json& j) {
    return {j.at("var").get<std::string>(), j.at("term").get<std::string>()};
}

}  // namespace

FuzzyModel parse_model(std::string_view json_text, const ScaleBindings& bindings) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("rule base is not valid JSON: ") + e.what());
    }
    try {
        std::vector<LinguisticVariable> inputs;
        for (const auto& v : doc.at("inputs")) {
            inputs.push_back(parse_variable(v, bindings));
        }
        auto output = parse_variable(doc.at("output"), bindings);
        std::vector<FuzzyRule> rules;
        for (const auto& r : doc.at("rules")) {
            FuzzyRule rule;
            for (const auto& c : r.at("if")) {
                rule.antecedents.push_back(parse_clause(c));
            }
            rule.consequent = parse_clause(r.at("then"));
            rules.push_back(std::move(rule));
        }
        return FuzzyModel(doc.value("name", std::string("model")), std::move(inputs),
                          std::move(output), std::move(rules),
                          doc.value("resolution", FuzzyModel::kDefaultResolution));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed rule base: ") + e.what());
    }
}

FuzzyModel load_model(const std::filesystem::path& path, const ScaleBindings& bindings) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open rule base " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), bindings);
}

}  // namespace aivsim::fuzzy
