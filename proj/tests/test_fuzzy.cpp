#include <cmath>
#include <random>

#include "aivsim/fuzzy.hpp"
#include "aivsim/simulation.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aivsim;
using namespace aivsim::fuzzy;

namespace {

LinguisticVariable lmh(const std::string& name) {
    return LinguisticVariable(name, 0.0, 1.0,
                              {{"Low", MembershipFunction::triangular(0, 0, 0.5)},
                               {"Medium", MembershipFunction::triangular(0, 0.5, 1)},
                               {"High", MembershipFunction::triangular(0.5, 1, 1)}});
}

// Piecewise-linear triangle written out independently of the library.
double tri_oracle(double x, double a, double b, double c) {
    if (x < a || x > c) return 0.0;
    if (x <= b) return b == a ? 1.0 : (x - a) / (b - a);
    return c == b ? 1.0 : (c - x) / (c - b);
}

}  // namespace

TEST_CASE("membership degrees") {
    const auto t = MembershipFunction::triangular(0, 0.5, 1);
    CHECK(membership_degree(t, 0.5) == doctest::Approx(1.0));
    CHECK(membership_degree(t, 0.25) == doctest::Approx(0.5));
    CHECK(membership_degree(t, -1.0) == 0.0);
    CHECK(membership_degree(t, 2.0) == 0.0);
    const auto z = MembershipFunction::trapezoidal(0, 0.2, 0.8, 1.0);
    CHECK(membership_degree(z, 0.9) == doctest::Approx(0.5));
    CHECK(membership_degree(z, 0.5) == doctest::Approx(1.0));
    // Shoulders: a degenerate left ramp is full membership at the edge.
    CHECK(membership_degree(MembershipFunction::triangular(0, 0, 0.5), 0.0) == doctest::Approx(1.0));
    CHECK(membership_degree(MembershipFunction::triangular(0.5, 1, 1), 1.0) == doctest::Approx(1.0));
}

TEST_CASE("membership stays in [0, 1] over a dense sweep") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        std::array<double, 4> p{u(gen), u(gen), u(gen), u(gen)};
        std::sort(p.begin(), p.end());
        const auto mf = MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3]);
        for (int i = 0; i <= 400; ++i) {
            const double d = membership_degree(mf, -3.0 + 6.0 * i / 400.0);
            REQUIRE(d >= 0.0);
            REQUIRE(d <= 1.0);
        }
    }
}

TEST_CASE("bad membership parameters are rejected") {
    CHECK_THROWS_AS(MembershipFunction::triangular(0.5, 0.2, 1.0), ConfigError);
    CHECK_THROWS_AS(MembershipFunction::trapezoidal(0, 0.5, 0.4, 1), ConfigError);
    CHECK_THROWS_AS(MembershipFunction::triangular(0, NAN, 1), ConfigError);
}

TEST_CASE("fuzzify a three-term variable") {
    const auto v = lmh("X");
    auto d = fuzzify(v, 0.5);
    CHECK(d["Low"] == doctest::Approx(0.0));
    CHECK(d["Medium"] == doctest::Approx(1.0));
    CHECK(d["High"] == doctest::Approx(0.0));
    d = fuzzify(v, 0.0);
    CHECK(d["Low"] == doctest::Approx(1.0));
    CHECK(d["Medium"] == doctest::Approx(0.0));
    d = fuzzify(v, 0.75);
    CHECK(d["Low"] == doctest::Approx(0.0));
    CHECK(d["Medium"] == doctest::Approx(0.5));
    CHECK(d["High"] == doctest::Approx(0.5));
    // Out-of-universe inputs are clamped.
    CHECK(fuzzify(v, 7.0)["High"] == doctest::Approx(1.0));
}

TEST_CASE("variables must cover their universe") {
    CHECK_THROWS_AS(LinguisticVariable("gap", 0, 1,
                                       {{"A", MembershipFunction::triangular(0, 0, 0.3)},
                                        {"B", MembershipFunction::triangular(0.6, 1, 1)}}),
                    ConfigError);
    CHECK_THROWS_AS(LinguisticVariable("dup", 0, 1,
                                       {{"A", MembershipFunction::triangular(0, 0, 1)},
                                        {"A", MembershipFunction::triangular(0, 1, 1)}}),
                    ConfigError);
}

TEST_CASE("rule activation is the minimum antecedent degree") {
    FuzzifiedInputs in{{"A", {{"Hi", 0.6}}}, {"B", {{"Hi", 0.3}}}, {"C", {{"Hi", 0.0}}}};
    CHECK(rule_activation({{{"A", "Hi"}, {"B", "Hi"}}, {"Out", "X"}}, in) == doctest::Approx(0.3));
    CHECK(rule_activation({{{"A", "Hi"}, {"C", "Hi"}}, {"Out", "X"}}, in) == 0.0);
    CHECK(rule_activation({{{"A", "Hi"}}, {"Out", "X"}}, {{"A", {{"Hi", 0.7}}}}) ==
          doctest::Approx(0.7));
    CHECK_THROWS_AS(rule_activation({{{"Z", "Hi"}}, {"Out", "X"}}, in), ConfigError);
    CHECK_THROWS_AS(rule_activation({{{"A", "Lo"}}, {"Out", "X"}}, in), ConfigError);
}

TEST_CASE("aggregation and centroid") {
    const FuzzyModel m("m", {lmh("In")}, lmh("Out"),
                       {{{{"In", "Low"}}, {"Out", "Low"}}, {{{"In", "High"}}, {"Out", "High"}}});

    SUBCASE("no rule fired gives an all-zero aggregate") {
        const auto agg = m.aggregate({0.0, 0.0});
        CHECK(agg.all_zero());
        CHECK_THROWS_AS(defuzzify_centroid(agg), NoRuleFired);
        CHECK_FALSE(m.try_evaluate({{"In", 0.5}}).has_value());
    }
    SUBCASE("a single full activation reproduces the consequent") {
        const auto agg = m.aggregate({1.0, 0.0});
        REQUIRE(agg.degrees.size() == 1001);
        for (std::size_t i = 0; i < agg.degrees.size(); ++i) {
            CHECK(agg.degrees[i] == doctest::Approx(tri_oracle(agg.abscissa(i), 0, 0, 0.5)));
        }
    }
    SUBCASE("symmetric activations give the midpoint") {
        const auto agg = m.aggregate({0.5, 0.5});
        for (std::size_t i = 0; i < agg.degrees.size(); ++i) {
            CHECK(agg.degrees[i] == doctest::Approx(agg.degrees[agg.degrees.size() - 1 - i]));
        }
        CHECK(std::abs(defuzzify_centroid(agg) - 0.5) < 1e-9);
    }
    SUBCASE("unclipped triangle centroid is its peak") {
        AggregatedSet agg{0.0, 1.0, std::vector<double>(1001)};
        for (std::size_t i = 0; i < 1001; ++i) agg.degrees[i] = tri_oracle(agg.abscissa(i), 0, 0.5, 1);
        CHECK(defuzzify_centroid(agg) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("missing inputs are configuration errors") {
        CHECK_THROWS_AS(m.evaluate(CrispInputs{}), ConfigError);
    }
}

TEST_CASE("centroid matches a dense brute-force integral") {
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        // Random aggregate: max of three clipped triangles.
        struct Piece { double a, b, c, h; };
        std::vector<Piece> pieces;
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3> p{u(gen), u(gen), u(gen)};
            std::sort(p.begin(), p.end());
            pieces.push_back({p[0], p[1], p[2], 0.1 + 0.9 * u(gen)});
        }
        auto f = [&](double x) {
            double y = 0.0;
            for (const auto& p : pieces) y = std::max(y, std::min(p.h, tri_oracle(x, p.a, p.b, p.c)));
            return y;
        };
        AggregatedSet agg{0.0, 1.0, std::vector<double>(1001)};
        for (std::size_t i = 0; i < 1001; ++i) agg.degrees[i] = f(agg.abscissa(i));
        if (agg.all_zero()) continue;
        const int n = 1'000'000;
        double num = 0.0, den = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            num += w * x * f(x);
            den += w * f(x);
        }
        CHECK(std::abs(defuzzify_centroid(agg) - num / den) <= 1e-3);
    }
}

TEST_CASE("centroid converges as the resolution doubles") {
    auto f = [](double x) { return std::max(std::min(0.7, tri_oracle(x, 0.1, 0.3, 0.6)),
                                            std::min(0.4, tri_oracle(x, 0.5, 0.8, 0.95))); };
    auto at = [&](std::size_t n) {
        AggregatedSet agg{0.0, 1.0, std::vector<double>(n)};
        for (std::size_t i = 0; i < n; ++i) agg.degrees[i] = f(agg.abscissa(i));
        return defuzzify_centroid(agg);
    };
    const double e1 = std::abs(at(251) - at(16001));
    const double e2 = std::abs(at(501) - at(16001));
    const double e3 = std::abs(at(1001) - at(16001));
    CHECK(e2 <= e1);
    CHECK(e3 <= e2);
    CHECK(e3 < 1e-4);
}

TEST_CASE("rule-base files parse and bind distance scales") {
    const char* text = R"({
      "name": "t", "resolution": 101,
      "inputs": [{"name": "D", "universe": [0, 1], "scale_to": "d_max",
                  "terms": [{"label": "Near", "kind": "triangular", "params": [0, 0, 1]},
                            {"label": "Far", "kind": "triangular", "params": [0, 1, 1]}]}],
      "output": {"name": "O", "universe": [0, 1],
                 "terms": [{"label": "Lo", "kind": "triangular", "params": [0, 0, 1]},
                           {"label": "Hi", "kind": "triangular", "params": [0, 1, 1]}]},
      "rules": [{"if": [{"var": "D", "term": "Near"}], "then": {"var": "O", "term": "Lo"}},
                {"if": [{"var": "D", "term": "Far"}], "then": {"var": "O", "term": "Hi"}}]})";
    const auto m = parse_model(text, {{"d_max", 200.0}});
    CHECK(m.input("D").hi() == doctest::Approx(200.0));
    CHECK(m.resolution() == 101);
    CHECK(m.evaluate({{"D", 0.0}}) < m.evaluate({{"D", 200.0}}));
    CHECK_THROWS_AS(parse_model(text), ConfigError);  // unbound scale
    CHECK_THROWS_AS(parse_model("{"), ConfigError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ConfigError);
}

TEST_CASE("shipped rule bases cover their input grids") {
    const auto assets = test::shipped_assets(allocation::Scenario::Sc8);
    const auto& ms = assets->models;
    for (const auto* m : {ms.cost.get(), ms.recharge.get(), ms.station.get(), ms.rate.get(), ms.speed.get()}) {
        REQUIRE(m != nullptr);
        CAPTURE(m->name());
        CHECK(m->uncovered_points(11).empty());
    }
}

TEST_CASE("shipped cost model corners and monotonicity") {
    const auto assets = test::shipped_assets(allocation::Scenario::Sc4);
    const auto& cost = *assets->models.cost;
    const double dmax = assets->routes.diameter();
    const double best = cost.evaluate({{"Availability", 1.0}, {"DistanceTarget", 0.0}, {"EnergyLevel", 1.0}});
    const double worst = cost.evaluate({{"Availability", 0.0}, {"DistanceTarget", dmax}, {"EnergyLevel", 0.0}});
    CHECK(best <= 25.0);
    CHECK(worst >= 75.0);
    // Non-increasing in availability and energy, non-decreasing in distance.
    const int n = 9;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = i / double(n - 1), e = j / double(n - 1);
            double prev = -1.0;
            for (int k = 0; k < n; ++k) {
                const double c = cost.evaluate({{"Availability", a}, {"DistanceTarget", dmax * k / (n - 1)}, {"EnergyLevel", e}});
                CHECK(c >= prev - 1e-9);
                prev = c;
            }
        }
    }
}
