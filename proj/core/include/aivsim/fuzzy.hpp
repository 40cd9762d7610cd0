#pragma once

// Mamdani fuzzy inference: piecewise-linear membership functions, linguistic
// variables, AND-only rule bases, min implication, max aggregation and
// centroid defuzzification. Models are immutable once constructed.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aivsim::fuzzy {

/// Raised for malformed models: unknown variables or terms, bad parameters,
/// missing inputs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the aggregated output set is identically zero.
class NoRuleFired : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MembershipFunction {
public:
    enum class Kind { Triangular, Trapezoidal };

    static MembershipFunction triangular(double a, double b, double c);
    static MembershipFunction trapezoidal(double a, double b, double c, double d);

    Kind kind() const { return kind_; }
    /// Breakpoints (a, b, c, d); triangles are stored as (a, b, b, c).
    const std::array<double, 4>& breakpoints() const { return p_; }
    double support_lo() const { return p_[0]; }
    double support_hi() const { return p_[3]; }

    double degree(double x) const;

    /// Same function with every breakpoint multiplied by `factor` (> 0).
    MembershipFunction scaled(double factor) const;

private:
    MembershipFunction(Kind kind, std::array<double, 4> p) : kind_(kind), p_(p) {}

    Kind kind_;
    std::array<double, 4> p_;
};

/// Degree of `x` in `mf`; total over finite x and always within [0, 1].
double membership_degree(const MembershipFunction& mf, double x);

struct Term {
    std::string label;
    MembershipFunction mf;
};

/// Term label -> degree.
using TermDegrees = std::map<std::string, double>;
/// Variable name -> term degrees.
using FuzzifiedInputs = std::map<std::string, TermDegrees>;

class LinguisticVariable {
public:
    /// Validates universe, term uniqueness, supports and coverage.
    LinguisticVariable(std::string name, double lo, double hi, std::vector<Term> terms,
                       std::string unit = {});

    const std::string& name() const { return name_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::string& unit() const { return unit_; }
    const std::vector<Term>& terms() const { return terms_; }

    std::optional<std::size_t> term_index(std::string_view label) const;
    double clamp(double x) const;

    /// Degrees per term, in term order, of the clamped input.
    std::vector<double> degrees(double x) const;

private:
    std::string name_;
    double lo_;
    double hi_;
    std::string unit_;
    std::vector<Term> terms_;
};

TermDegrees fuzzify(const LinguisticVariable& var, double x);

struct Clause {
    std::string variable;
    std::string term;
};

struct FuzzyRule {
    std::vector<Clause> antecedents;
    Clause consequent;
};

/// min over the antecedent degrees. Throws ConfigError when a referenced
/// variable or term is absent from `fuzzified`.
double rule_activation(const FuzzyRule& rule, const FuzzifiedInputs& fuzzified);

/// Output membership sampled at evenly spaced abscissae spanning [lo, hi].
struct AggregatedSet {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> degrees;

    double abscissa(std::size_t i) const;
    bool all_zero() const;
};

/// Centroid of the aggregate under trapezoid-rule weights. Throws NoRuleFired
/// when every sample is zero.
double defuzzify_centroid(const AggregatedSet& agg);

using CrispInputs = std::map<std::string, double>;

class FuzzyModel {
public:
    static constexpr int kDefaultResolution = 1001;

    FuzzyModel(std::string name, std::vector<LinguisticVariable> inputs,
               LinguisticVariable output, std::vector<FuzzyRule> rules,
               int resolution = kDefaultResolution);

    const std::string& name() const { return name_; }
    const std::vector<LinguisticVariable>& inputs() const { return inputs_; }
    const LinguisticVariable& output() const { return output_; }
    const std::vector<FuzzyRule>& rules() const { return rules_; }
    int resolution() const { return resolution_; }

    const LinguisticVariable& input(std::string_view name) const;

    /// Per-rule activation strengths for crisp inputs, in rule order.
    std::vector<double> activations(const CrispInputs& inputs) const;

    /// Clipped consequents of the given activations, max-aggregated.
    AggregatedSet aggregate(const std::vector<double>& activations) const;

    AggregatedSet infer(const CrispInputs& inputs) const;
    double evaluate(const CrispInputs& inputs) const;
    /// Inputs given positionally, in the order of inputs().
    double evaluate(std::span<const double> ordered_inputs) const;
    std::optional<double> try_evaluate(const CrispInputs& inputs) const;

    /// Grid points (one value per input, in input order) at which no rule
    /// fires. Each input universe is sampled at `points_per_input` values.
    std::vector<std::vector<double>> uncovered_points(int points_per_input = 21) const;

private:
    std::vector<double> ordered(const CrispInputs& inputs) const;
    std::vector<double> activations_ordered(std::span<const double> values) const;

    struct ResolvedRule {
        std::vector<std::pair<std::size_t, std::size_t>> antecedents;  // (input, term)
        std::size_t consequent_term;
    };

    std::string name_;
    std::vector<LinguisticVariable> inputs_;
    LinguisticVariable output_;
    std::vector<FuzzyRule> rules_;
    std::vector<ResolvedRule> resolved_;
    std::vector<std::vector<double>> consequent_samples_;  // per output term
    int resolution_;
};

/// Named scale factors a rule-base file can bind a variable to via
/// `"scale_to": "<name>"`; universe and breakpoints are then multiplied by
/// the bound value.
using ScaleBindings = std::map<std::string, double>;

FuzzyModel parse_model(std::string_view json_text, const ScaleBindings& bindings = {});
FuzzyModel load_model(const std::filesystem::path& path, const ScaleBindings& bindings = {});

}  // namespace aivsim::fuzzy
