#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "portagrad/corpus.hpp"
#include "test_helpers.hpp"

using namespace portagrad;

namespace {

CorpusRecord slide(std::string performer, int year, double gradient, double bpm,
                   int bar = 12) {
    CorpusRecord r;
    r.performer = std::move(performer);
    r.year = year;
    r.sonata = Sonata::op69();
    r.bar = bar;
    r.kind = TransitionKind::sliding;
    r.gradient_px = gradient / 2220.0;
    r.gradient_hz_s = gradient;
    r.duration_s = 0.12;
    r.bpm = bpm;
    return r;
}

CorpusRecord shift(std::string performer, int year, double bpm) {
    CorpusRecord r;
    r.performer = std::move(performer);
    r.year = year;
    r.sonata = Sonata::op102no1();
    r.bar = 40;
    r.kind = TransitionKind::clean_shift;
    r.gradient_px = 0.0;
    r.gradient_hz_s = 0.0;
    r.duration_s = 0.02;
    r.bpm = bpm;
    return r;
}

}  // namespace

TEST_CASE("corpus round-trips bit-exactly, including quoted fields") {
    std::vector<CorpusRecord> recs;
    recs.push_back(slide("Casals, Pablo", 1936, 3133.333333333333, 62.5));
    recs.push_back(shift("A \"quoted\" name", 1988, 119.75));
    auto odd = slide("multi\nline", 2001, 0.1 + 0.2, 95.0);  // non-representable decimals
    odd.sonata = Sonata::parse("Brahms op38");
    recs.push_back(odd);

    const auto path = testutil::temp_path("corpus_rt.csv");
    save_corpus(recs, path);

    {
        std::ifstream f(path);
        std::string header;
        std::getline(f, header);
        CHECK(header == kCorpusHeader);
    }

    const auto back = load_corpus(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].performer == recs[i].performer);
        CHECK(back[i].year == recs[i].year);
        CHECK(back[i].sonata == recs[i].sonata);
        CHECK(back[i].bar == recs[i].bar);
        CHECK(back[i].kind == recs[i].kind);
        REQUIRE(back[i].gradient_px == recs[i].gradient_px);
        REQUIRE(back[i].gradient_hz_s == recs[i].gradient_hz_s);
        REQUIRE(back[i].duration_s == recs[i].duration_s);
        REQUIRE(back[i].bpm == recs[i].bpm);
    }
}

TEST_CASE("header-only file loads as an empty corpus") {
    const auto path = testutil::temp_path("corpus_empty.csv");
    save_corpus({}, path);
    CHECK(load_corpus(path).empty());
}

TEST_CASE("sonata identifiers canonicalize and free text survives") {
    CHECK(Sonata::parse("op69") == Sonata::op69());
    CHECK(Sonata::parse("op102no1") == Sonata::op102no1());
    const auto other = Sonata::parse("Elgar concerto");
    CHECK(other.kind == Sonata::Kind::other);
    CHECK(other.str() == "Elgar concerto");
}

TEST_CASE("ordinary least squares matches hand-computed values") {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};

    // slope 0.8, intercept 0.5, r^2 0.64 by hand (normal equations).
    const std::vector<double> ys1 = {1.0, 2.0, 4.0, 3.0};
    const auto r1 = linear_regression(xs, ys1);
    CHECK(r1.slope == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r1.intercept == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r1.r_squared == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(r1.n == 4);

    // Transposing the first two responses: slope 0.6, intercept 1.0, r^2 0.36.
    const std::vector<double> ys2 = {2.0, 1.0, 4.0, 3.0};
    const auto r2 = linear_regression(xs, ys2);
    CHECK(r2.slope == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r2.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r2.r_squared == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("regression conventions and failure modes") {
    const std::vector<double> xs = {1.0, 2.0, 3.0};
    const std::vector<double> flat = {5.0, 5.0, 5.0};
    const auto r = linear_regression(xs, flat);
    CHECK(r.slope == 0.0);
    CHECK(r.intercept == 5.0);
    CHECK(r.r_squared == 0.0);

    const std::vector<double> const_xs = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(linear_regression(const_xs, xs), std::invalid_argument);
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(linear_regression(one, one), std::invalid_argument);
    const std::vector<double> two = {1.0, 2.0};
    CHECK_THROWS_AS(linear_regression(xs, two), std::invalid_argument);
}

TEST_CASE("validation failures carry the line number and reason") {
    const auto expect_error = [](const std::string& body, std::size_t line,
                                 const std::string& needle) {
        std::istringstream in(std::string(kCorpusHeader) + "\n" + body);
        try {
            load_corpus_stream(in);
            FAIL_CHECK("expected CorpusError for: " << body);
        } catch (const CorpusError& e) {
            CHECK(e.line() == line);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_error("Casals,1866,op69,3,sliding,1,2220,0.1,60\n", 2, "year");
    expect_error("Casals,1936,op69,0,sliding,1,2220,0.1,60\n", 2, "bar");
    expect_error("Casals,1936,op69,3,wobbling,1,2220,0.1,60\n", 2, "kind");
    expect_error("Casals,1936,op69,3,sliding,1,-5,0.1,60\n", 2, "gradient_hz_s");
    expect_error("Casals,1936,op69,3,sliding,1,2220,0.1,0\n", 2, "bpm");
    expect_error("Casals,1936,op69,3,sliding,1,2220,0.1\n", 2, "9 columns");
    expect_error("ok,1936,op69,3,sliding,1,2220,0.1,60\nbad,1936,op69,3,sliding,1,abc,0.1,60\n",
                 3, "gradient_hz_s");
    // Zero-by-convention violation names the convention.
    expect_error("Casals,1936,op69,3,clean_shift,0,100,0.02,60\n", 2, "convention");
}

TEST_CASE("bad header and missing file are corpus errors") {
    std::istringstream in("performer,year\nCasals,1936\n");
    CHECK_THROWS_AS(load_corpus_stream(in), CorpusError);
    CHECK_THROWS_AS(load_corpus(testutil::temp_path("no_such.csv")), CorpusError);
}

TEST_CASE("saving validates records first") {
    std::vector<CorpusRecord> recs = {shift("X", 1980, 60.0)};
    recs[0].gradient_hz_s = 50.0;  // clean shift with nonzero gradient
    CHECK_THROWS_AS(save_corpus(recs, testutil::temp_path("invalid.csv")), CorpusError);
}

TEST_CASE("era summary bins by year, half-open except the last") {
    std::vector<CorpusRecord> recs = {
        slide("a", 1935, 1530.0, 60.0), slide("b", 1949, 4700.0, 70.0),
        slide("c", 1950, 900.0, 80.0),  slide("d", 1969, 2100.0, 90.0),
        slide("e", 1990, 800.0, 100.0), slide("f", 2012, 520.0, 110.0),
        shift("g", 1940, 65.0),  // excluded from stats
    };

    const auto summaries = era_summary(recs, default_era_bounds());
    REQUIRE(summaries.size() == 3);  // 1970-1990 is empty and skipped
    CHECK(summaries[0].label == "1930-1950");
    CHECK(summaries[0].n == 2);
    CHECK(summaries[0].min_gradient == 1530.0);
    CHECK(summaries[0].max_gradient == 4700.0);
    CHECK(summaries[0].mean_gradient == doctest::Approx(3115.0));
    CHECK(summaries[1].label == "1950-1970");
    CHECK(summaries[1].n == 2);
    CHECK(summaries[2].label == "1990-2012");
    CHECK(summaries[2].n == 2);  // 1990 and the closed upper bound 2012

    const auto with_empty = era_summary(recs, default_era_bounds(), true);
    REQUIRE(with_empty.size() == 4);
    CHECK(with_empty[2].label == "1970-1990");
    CHECK(with_empty[2].n == 0);

    CHECK_THROWS_AS(era_summary(recs, {{1950, 1940}}), std::invalid_argument);
    CHECK_THROWS_AS(era_summary(recs, {{1930, 1960}, {1950, 1980}}), std::invalid_argument);
}

TEST_CASE("tempo trend excludes zero gradients and reports them per bucket") {
    std::vector<CorpusRecord> recs = {
        slide("a", 1950, 3000.0, 60.0),
        slide("b", 1960, 1500.0, 120.0),
        shift("c", 1970, 100.0),
        shift("d", 1971, 100.4),
    };
    const auto trend = gradient_vs_tempo(recs);
    CHECK(trend.regression.n == 2);
    CHECK(trend.regression.slope == doctest::Approx(-25.0).epsilon(1e-12));
    CHECK(trend.zero_excluded == 2);
    REQUIRE(trend.zero_counts.count(100) == 1);
    CHECK(trend.zero_counts.at(100) == 2);  // both shifts round to the same bucket

    const auto year_trend = gradient_vs_year(recs);
    CHECK(year_trend.regression.n == 2);
    CHECK(year_trend.zero_counts.count(1970) == 1);
    CHECK(year_trend.zero_counts.count(1971) == 1);
}
