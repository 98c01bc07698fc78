#include "meta_audit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "meta_audit/combine.hpp"

namespace meta_audit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto comma = line.find(',');
    cells.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Walks a CSV body, handing each data row to `row` with its line number.
class Table {
 public:
  Table(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  template <typename OnHeader, typename OnRow>
  void scan(OnHeader on_header, OnRow on_row) {
    bool have_header = false;
    std::size_t lineno = 0;
    std::string_view rest = text_;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      const std::string_view line = trim(rest.substr(0, nl));
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      ++lineno;
      if (line.empty() || line.front() == '#') continue;
      auto cells = split(line);
      if (!have_header) {
        header_ = cells;
        for (std::size_t i = 0; i < header_.size(); ++i) {
          if (!column_.emplace(std::string(header_[i]), i).second) {
            throw error(lineno, "duplicate column '" + std::string(header_[i]) + "'");
          }
        }
        on_header(lineno);
        have_header = true;
        continue;
      }
      if (cells.size() != header_.size()) {
        throw error(lineno, "expected " + std::to_string(header_.size()) +
                                " fields, found " + std::to_string(cells.size()));
      }
      on_row(lineno, cells);
    }
    if (!have_header) throw DataError(source_ + ": missing header row");
  }

  std::optional<std::size_t> column(const std::string& name) const {
    auto it = column_.find(name);
    if (it == column_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<std::string_view>& header() const { return header_; }

  DataError error(std::size_t lineno, const std::string& what) const {
    return DataError(source_ + ":" + std::to_string(lineno) + ": " + what);
  }

 private:
  std::string_view text_;
  std::string source_;
  std::vector<std::string_view> header_;
  std::unordered_map<std::string, std::size_t> column_;
};

template <typename T>
std::optional<T> parse_number(const Table& t, std::size_t lineno,
                              const std::vector<std::string_view>& cells,
                              std::optional<std::size_t> col) {
  if (!col) return std::nullopt;
  const std::string_view cell = cells[*col];
  if (cell.empty()) return std::nullopt;
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw t.error(lineno, "column '" + std::string(t.header()[*col]) +
                              "': cannot parse '" + std::string(cell) + "'");
  }
  return v;
}

void require_known(const Table& t, std::size_t lineno,
                   std::initializer_list<std::string_view> known) {
  for (auto name : t.header()) {
    bool ok = false;
    for (auto k : known) ok = ok || name == k;
    if (!ok) throw t.error(lineno, "unknown column '" + std::string(name) + "'");
  }
}

bool disagree(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
  return std::fabs(a - b) > 1e-6 * scale;
}

}  // namespace

ValidationError::ValidationError(const std::string& source,
                                 std::vector<Violation> violations)
    : DataError([&] {
        std::string msg = source + ": invalid studies:";
        for (const auto& v : violations) {
          msg += "\n  study '" + v.study_id + "': " + v.rule;
        }
        return msg;
      }()),
      violations_(std::move(violations)) {}

MetaDataset parse_studies_text(std::string_view text, std::string source,
                               std::string label) {
  Table t(text, source);
  MetaDataset ds;
  ds.label = std::move(label);
  std::optional<std::size_t> c_id, c_p, c_effect, c_se, c_rr, c_lo, c_hi, c_dir;

  t.scan(
      [&](std::size_t lineno) {
        require_known(t, lineno,
                      {"id", "p_value", "effect", "se", "rr", "ci_low",
                       "ci_high", "direction"});
        c_id = t.column("id");
        if (!c_id) throw t.error(lineno, "header lacks required column 'id'");
        c_p = t.column("p_value");
        c_effect = t.column("effect");
        c_se = t.column("se");
        c_rr = t.column("rr");
        c_lo = t.column("ci_low");
        c_hi = t.column("ci_high");
        c_dir = t.column("direction");
      },
      [&](std::size_t lineno, const std::vector<std::string_view>& cells) {
        BaseStudy s;
        s.id = std::string(cells[*c_id]);
        s.p_value = parse_number<double>(t, lineno, cells, c_p);
        s.effect = parse_number<double>(t, lineno, cells, c_effect);
        s.se = parse_number<double>(t, lineno, cells, c_se);

        const auto rr = parse_number<double>(t, lineno, cells, c_rr);
        const auto lo = parse_number<double>(t, lineno, cells, c_lo);
        const auto hi = parse_number<double>(t, lineno, cells, c_hi);
        const int given = rr.has_value() + lo.has_value() + hi.has_value();
        if (given != 0 && given != 3) {
          throw t.error(lineno, "study '" + s.id +
                                    "': rr, ci_low and ci_high must be given together");
        }
        if (given == 3) {
          if (!(*rr > 0.0 && *lo > 0.0 && *hi > *lo)) {
            throw t.error(lineno, "study '" + s.id +
                                      "': need rr > 0 and 0 < ci_low < ci_high");
          }
          const double effect = std::log(*rr);
          const double se = (std::log(*hi) - std::log(*lo)) / (2.0 * kZ95);
          if ((s.effect && disagree(*s.effect, effect)) ||
              (s.se && disagree(*s.se, se))) {
            throw t.error(lineno, "study '" + s.id +
                                      "': effect/se disagree with rr and its interval");
          }
          s.effect = effect;
          s.se = se;
        }

        const std::string_view dir = c_dir ? cells[*c_dir] : std::string_view{};
        const auto parsed = parse_direction(dir);
        if (!parsed) {
          throw t.error(lineno, "study '" + s.id + "': unknown direction '" +
                                    std::string(dir) + "'");
        }
        s.direction = *parsed;
        if (s.direction == Direction::unspecified && s.effect && *s.effect != 0.0) {
          s.direction = *s.effect < 0.0 ? Direction::decrease : Direction::increase;
        }
        ds.studies.push_back(std::move(s));
      });

  if (ds.studies.empty()) throw DataError(source + ": no study rows");
  auto violations = validate_dataset(ds);
  if (!violations.empty()) throw ValidationError(source, std::move(violations));
  return ds;
}

MetaDataset parse_studies_csv(const std::filesystem::path& path) {
  return parse_studies_text(read_file(path), path.string(),
                            path.stem().string());
}

std::vector<StudyCounts> parse_counts_text(std::string_view text,
                                           std::string source) {
  Table t(text, source);
  std::vector<StudyCounts> out;
  std::optional<std::size_t> c_id, c_out, c_pred, c_cov, c_lags, c_foods,
      c_label, c_s1, c_s2, c_s3;

  t.scan(
      [&](std::size_t lineno) {
        require_known(t, lineno,
                      {"id", "label", "year", "outcomes", "predictors",
                       "covariates", "lags", "foods", "space1", "space2",
                       "space3"});
        for (const char* req : {"id", "outcomes", "predictors", "covariates"}) {
          if (!t.column(req)) {
            throw t.error(lineno, std::string("header lacks required column '") +
                                      req + "'");
          }
        }
        c_id = t.column("id");
        c_out = t.column("outcomes");
        c_pred = t.column("predictors");
        c_cov = t.column("covariates");
        c_lags = t.column("lags");
        c_foods = t.column("foods");
        c_label = t.column("label");
        c_s1 = t.column("space1");
        c_s2 = t.column("space2");
        c_s3 = t.column("space3");
      },
      [&](std::size_t lineno, const std::vector<std::string_view>& cells) {
        StudyCounts c;
        c.id = std::string(cells[*c_id]);
        if (c.id.empty()) throw t.error(lineno, "empty id");
        if (c_label) c.label = std::string(cells[*c_label]);
        auto required = [&](std::optional<std::size_t> col) {
          auto v = parse_number<std::int64_t>(t, lineno, cells, col);
          if (!v) {
            throw t.error(lineno, "study '" + c.id + "': missing '" +
                                      std::string(t.header()[*col]) + "'");
          }
          return *v;
        };
        c.outcomes = required(c_out);
        c.predictors = required(c_pred);
        c.covariates = required(c_cov);
        c.lags = parse_number<std::int64_t>(t, lineno, cells, c_lags).value_or(1);
        c.foods = parse_number<std::int64_t>(t, lineno, cells, c_foods).value_or(0);
        for (auto v : {c.outcomes, c.predictors, c.covariates, c.lags, c.foods}) {
          if (v < 0) {
            throw t.error(lineno, "study '" + c.id + "': negative count " +
                                      std::to_string(v));
          }
        }
        c.reported_space1 = parse_number<std::uint64_t>(t, lineno, cells, c_s1);
        c.reported_space2 = parse_number<std::uint64_t>(t, lineno, cells, c_s2);
        c.reported_space3 = parse_number<std::uint64_t>(t, lineno, cells, c_s3);
        out.push_back(std::move(c));
      });
  return out;
}

std::vector<StudyCounts> parse_counts_csv(const std::filesystem::path& path) {
  return parse_counts_text(read_file(path), path.string());
}

}  // namespace meta_audit
