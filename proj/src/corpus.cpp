#include "portagrad/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "portagrad/strnum.hpp"

namespace portagrad {
namespace {

int current_year() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    return tm_utc.tm_year + 1900;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

// One CSV record, quotes honored. Returns false at EOF with nothing read.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                 std::size_t& record_line) {
    fields.clear();
    int c = in.peek();
    if (c == EOF) return false;
    record_line = line;

    std::string field;
    bool quoted = false;
    while (true) {
        c = in.get();
        if (c == EOF) {
            fields.push_back(field);
            return true;
        }
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            ++line;
            fields.push_back(field);
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
}

double parse_double_field(const std::string& s, const char* name, std::size_t line) {
    auto v = parse_double(s);
    if (!v || !std::isfinite(*v)) throw CorpusError(line, std::string("bad ") + name + ": " + s);
    return *v;
}

int parse_int_field(const std::string& s, const char* name, std::size_t line) {
    auto v = parse_int(s);
    if (!v) throw CorpusError(line, std::string("bad ") + name + ": " + s);
    return static_cast<int>(*v);
}

}  // namespace

Sonata Sonata::parse(const std::string& s) {
    if (s == "op69") return op69();
    if (s == "op102no1") return op102no1();
    return {Kind::other, s};
}

std::string validate_record(const CorpusRecord& rec) {
    if (rec.performer.empty()) return "performer must be non-empty";
    if (rec.year < 1877 || rec.year > current_year())
        return "year " + std::to_string(rec.year) + " outside 1877-" +
               std::to_string(current_year());
    if (rec.bar < 1) return "bar must be a positive integer";
    if (!(rec.gradient_px >= 0.0)) return "gradient_px must be >= 0";
    if (!(rec.gradient_hz_s >= 0.0)) return "gradient_hz_s must be >= 0";
    if (!(rec.duration_s >= 0.0)) return "duration_s must be >= 0";
    if (!(rec.bpm > 0.0)) return "bpm must be positive";
    if (rec.kind == TransitionKind::clean_shift) {
        if (rec.gradient_hz_s != 0.0 || rec.gradient_px != 0.0)
            return "clean_shift gradient must be zero (zero by convention)";
    } else {
        if (!(rec.gradient_hz_s > 0.0)) return "sliding gradient must be positive";
        if (!(rec.duration_s > 0.0)) return "sliding duration must be positive";
    }
    return {};
}

std::vector<CorpusRecord> load_corpus_stream(std::istream& in) {
    std::vector<std::string> fields;
    std::size_t line = 1, record_line = 1;

    if (!read_record(in, fields, line, record_line))
        throw CorpusError(1, "empty file, expected header");
    {
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) joined.push_back(',');
            joined += fields[i];
        }
        if (joined != kCorpusHeader)
            throw CorpusError(record_line, "bad header, expected: " + std::string(kCorpusHeader));
    }

    std::vector<CorpusRecord> out;
    while (read_record(in, fields, line, record_line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != 9)
            throw CorpusError(record_line, "expected 9 columns, got " +
                                               std::to_string(fields.size()));
        CorpusRecord rec;
        rec.performer = fields[0];
        rec.year = parse_int_field(fields[1], "year", record_line);
        rec.sonata = Sonata::parse(fields[2]);
        rec.bar = parse_int_field(fields[3], "bar", record_line);
        try {
            rec.kind = parse_transition_kind(fields[4]);
        } catch (const std::invalid_argument& e) {
            throw CorpusError(record_line, e.what());
        }
        rec.gradient_px = parse_double_field(fields[5], "gradient_px", record_line);
        rec.gradient_hz_s = parse_double_field(fields[6], "gradient_hz_s", record_line);
        rec.duration_s = parse_double_field(fields[7], "duration_s", record_line);
        rec.bpm = parse_double_field(fields[8], "bpm", record_line);

        const std::string reason = validate_record(rec);
        if (!reason.empty()) throw CorpusError(record_line, reason);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CorpusError(0, "cannot open " + path);
    return load_corpus_stream(f);
}

void save_corpus_stream(const std::vector<CorpusRecord>& records, std::ostream& out) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string reason = validate_record(records[i]);
        if (!reason.empty()) throw CorpusError(i + 2, reason);
    }
    out << kCorpusHeader << '\n';
    for (const auto& rec : records) {
        write_field(out, rec.performer);
        out << ',' << rec.year << ',';
        write_field(out, rec.sonata.str());
        out << ',' << rec.bar << ',' << transition_kind_name(rec.kind) << ','
            << format_double(rec.gradient_px) << ',' << format_double(rec.gradient_hz_s) << ','
            << format_double(rec.duration_s) << ',' << format_double(rec.bpm) << '\n';
    }
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CorpusError(0, "cannot open " + path);
    save_corpus_stream(records, f);
    if (!f) throw CorpusError(0, "write failure: " + path);
}

RegressionResult linear_regression(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("regression: xs and ys must have equal length");
    if (xs.size() < 2) throw std::invalid_argument("regression: need at least two points");

    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("regression: xs must not be constant");

    RegressionResult res;
    res.n = xs.size();
    res.slope = sxy / sxx;
    res.intercept = my - res.slope * mx;
    if (syy == 0.0) {
        // Constant ys: flat fit, no explainable variance.
        res.slope = 0.0;
        res.intercept = my;
        res.r_squared = 0.0;
        return res;
    }
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (res.intercept + res.slope * xs[i]);
        ss_res += e * e;
    }
    res.r_squared = 1.0 - ss_res / syy;
    return res;
}

std::vector<EraBounds> default_era_bounds() {
    return {{1930, 1950}, {1950, 1970}, {1970, 1990}, {1990, 2012}};
}

std::vector<EraSummary> era_summary(const std::vector<CorpusRecord>& records,
                                    const std::vector<EraBounds>& bounds, bool include_empty) {
    if (bounds.empty()) throw std::invalid_argument("era_summary: no bins");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!(bounds[i].start_year < bounds[i].end_year))
            throw std::invalid_argument("era_summary: bin start must be < end");
        if (i > 0 && bounds[i].start_year < bounds[i - 1].end_year)
            throw std::invalid_argument("era_summary: bins must be ascending and disjoint");
    }

    std::vector<EraSummary> out;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const bool last = i + 1 == bounds.size();
        EraSummary summary;
        summary.label =
            std::to_string(bounds[i].start_year) + "-" + std::to_string(bounds[i].end_year);
        double sum = 0.0;
        for (const auto& rec : records) {
            if (rec.kind != TransitionKind::sliding || rec.gradient_hz_s <= 0.0) continue;
            const bool in_bin = rec.year >= bounds[i].start_year &&
                                (last ? rec.year <= bounds[i].end_year
                                      : rec.year < bounds[i].end_year);
            if (!in_bin) continue;
            if (summary.n == 0) {
                summary.min_gradient = summary.max_gradient = rec.gradient_hz_s;
            } else {
                summary.min_gradient = std::min(summary.min_gradient, rec.gradient_hz_s);
                summary.max_gradient = std::max(summary.max_gradient, rec.gradient_hz_s);
            }
            sum += rec.gradient_hz_s;
            ++summary.n;
        }
        if (summary.n > 0) summary.mean_gradient = sum / static_cast<double>(summary.n);
        if (summary.n > 0 || include_empty) out.push_back(std::move(summary));
    }
    return out;
}

namespace {

TrendResult gradient_trend(const std::vector<CorpusRecord>& records, bool by_tempo) {
    TrendResult res;
    std::vector<double> xs, ys;
    for (const auto& rec : records) {
        const double x = by_tempo ? rec.bpm : static_cast<double>(rec.year);
        if (rec.kind != TransitionKind::sliding || rec.gradient_hz_s <= 0.0) {
            ++res.zero_excluded;
            ++res.zero_counts[by_tempo ? static_cast<int>(std::lround(rec.bpm)) : rec.year];
            continue;
        }
        xs.push_back(x);
        ys.push_back(rec.gradient_hz_s);
    }
    res.regression = linear_regression(xs, ys);
    return res;
}

}  // namespace

TrendResult gradient_vs_tempo(const std::vector<CorpusRecord>& records) {
    return gradient_trend(records, true);
}

TrendResult gradient_vs_year(const std::vector<CorpusRecord>& records) {
    return gradient_trend(records, false);
}

}  // namespace portagrad
