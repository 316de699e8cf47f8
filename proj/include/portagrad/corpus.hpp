#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "portagrad/errors.hpp"
#include "portagrad/events.hpp"

namespace portagrad {

// Work identifier: the two catalogued cello sonatas get canonical spellings,
// anything else round-trips as free text.
struct Sonata {
    enum class Kind { op69, op102no1, other };
    Kind kind = Kind::other;
    std::string text;

    static Sonata op69() { return {Kind::op69, "op69"}; }
    static Sonata op102no1() { return {Kind::op102no1, "op102no1"}; }
    static Sonata parse(const std::string& s);
    const std::string& str() const { return text; }
    bool operator==(const Sonata& o) const = default;
};

struct CorpusRecord {
    std::string performer;
    int year = 0;
    Sonata sonata;
    int bar = 0;
    TransitionKind kind = TransitionKind::sliding;
    double gradient_px = 0.0;
    double gradient_hz_s = 0.0;
    double duration_s = 0.0;
    double bpm = 0.0;
};

inline constexpr const char* kCorpusHeader =
    "performer,year,sonata,bar,kind,gradient_px,gradient_hz_s,duration_s,bpm";

// Returns a human-readable reason if the record is invalid, empty otherwise.
std::string validate_record(const CorpusRecord& rec);

std::vector<CorpusRecord> load_corpus(const std::string& path);
std::vector<CorpusRecord> load_corpus_stream(std::istream& in);
void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path);
void save_corpus_stream(const std::vector<CorpusRecord>& records, std::ostream& out);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares of ys on xs. Needs n >= 2 and non-constant xs;
// constant ys yield slope 0 and r_squared 0 by convention.
RegressionResult linear_regression(std::span<const double> xs, std::span<const double> ys);

struct EraBounds {
    int start_year = 0;
    int end_year = 0;
};

// Catalogue bins; half-open [start, end) except the last, which is closed.
std::vector<EraBounds> default_era_bounds();

struct EraSummary {
    std::string label;  // "start-end"
    std::size_t n = 0;
    double min_gradient = 0.0;
    double max_gradient = 0.0;
    double mean_gradient = 0.0;
};

// Sliding events only; zero-gradient records never reach the stats. Empty
// eras are skipped unless include_empty, in which case n = 0 rows appear.
std::vector<EraSummary> era_summary(const std::vector<CorpusRecord>& records,
                                    const std::vector<EraBounds>& bounds,
                                    bool include_empty = false);

struct TrendResult {
    RegressionResult regression;
    std::size_t zero_excluded = 0;
    std::map<int, std::size_t> zero_counts;  // bucket (rounded BPM or year) -> count
};

TrendResult gradient_vs_tempo(const std::vector<CorpusRecord>& records);
TrendResult gradient_vs_year(const std::vector<CorpusRecord>& records);

}  // namespace portagrad
