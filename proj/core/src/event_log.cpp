#include "relmine/event_log.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "relmine/error.hpp"

namespace relmine {

std::vector<std::string> EventLog::activity_universe() const {
  std::set<std::string> names;
  for (const Trace& t : traces) {
    for (const Event& e : t.events) names.insert(e.activity);
  }
  return {names.begin(), names.end()};
}

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, std::int64_t m, std::int64_t d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, std::int64_t& m,
                     std::int64_t& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool days_in_month_ok(std::int64_t y, std::int64_t m, std::int64_t d) {
  static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  std::int64_t len = lengths[m - 1];
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) len = 29;
  return d <= len;
}

struct FormatToken {
  enum Kind { yyyy, yy, MM, dd, HH, mm, ss, SSS, literal } kind;
  char ch = '\0';
};

std::vector<FormatToken> tokenize_format(const std::string& format) {
  std::vector<FormatToken> tokens;
  std::size_t i = 0;
  auto run = [&](char c) {
    std::size_t n = 0;
    while (i + n < format.size() && format[i + n] == c) ++n;
    return n;
  };
  while (i < format.size()) {
    const char c = format[i];
    std::size_t n = run(c);
    switch (c) {
      case 'y':
        if (n >= 4) { tokens.push_back({FormatToken::yyyy}); i += 4; }
        else if (n >= 2) { tokens.push_back({FormatToken::yy}); i += 2; }
        else throw ConfigError("timestamp format: 'y' must appear as yy or yyyy");
        break;
      case 'M':
        if (n < 2) throw ConfigError("timestamp format: 'M' must appear as MM");
        tokens.push_back({FormatToken::MM}); i += 2;
        break;
      case 'd':
        if (n < 2) throw ConfigError("timestamp format: 'd' must appear as dd");
        tokens.push_back({FormatToken::dd}); i += 2;
        break;
      case 'H':
        if (n < 2) throw ConfigError("timestamp format: 'H' must appear as HH");
        tokens.push_back({FormatToken::HH}); i += 2;
        break;
      case 'm':
        if (n < 2) throw ConfigError("timestamp format: 'm' must appear as mm");
        tokens.push_back({FormatToken::mm}); i += 2;
        break;
      case 's':
        if (n < 2) throw ConfigError("timestamp format: 's' must appear as ss");
        tokens.push_back({FormatToken::ss}); i += 2;
        break;
      case 'S':
        if (n < 3) throw ConfigError("timestamp format: 'S' must appear as SSS");
        tokens.push_back({FormatToken::SSS}); i += 3;
        break;
      default:
        tokens.push_back({FormatToken::literal, c}); ++i;
        break;
    }
  }
  return tokens;
}

std::size_t token_width(FormatToken::Kind k) {
  switch (k) {
    case FormatToken::yyyy: return 4;
    case FormatToken::SSS: return 3;
    case FormatToken::literal: return 1;
    default: return 2;
  }
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text, const std::string& format) {
  const auto tokens = tokenize_format(format);
  std::int64_t year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0,
               millis = 0;
  std::size_t pos = 0;
  for (const FormatToken& tok : tokens) {
    const std::size_t w = token_width(tok.kind);
    if (pos + w > text.size()) {
      throw DataError("timestamp '" + text + "' too short for format '" +
                      format + "'");
    }
    if (tok.kind == FormatToken::literal) {
      if (text[pos] != tok.ch) {
        throw DataError("timestamp '" + text + "' does not match format '" +
                        format + "'");
      }
      ++pos;
      continue;
    }
    std::int64_t value = 0;
    for (std::size_t j = 0; j < w; ++j) {
      const char c = text[pos + j];
      if (c < '0' || c > '9') {
        throw DataError("timestamp '" + text + "' has a non-digit where format '" +
                        format + "' expects one");
      }
      value = value * 10 + (c - '0');
    }
    pos += w;
    switch (tok.kind) {
      case FormatToken::yyyy: year = value; break;
      case FormatToken::yy: year = 2000 + value; break;
      case FormatToken::MM: month = value; break;
      case FormatToken::dd: day = value; break;
      case FormatToken::HH: hour = value; break;
      case FormatToken::mm: minute = value; break;
      case FormatToken::ss: second = value; break;
      case FormatToken::SSS: millis = value; break;
      default: break;
    }
  }
  if (pos != text.size()) {
    throw DataError("timestamp '" + text + "' has trailing characters beyond format '" +
                    format + "'");
  }
  if (!days_in_month_ok(year, month, day) || hour > 23 || minute > 59 ||
      second > 59) {
    throw DataError("timestamp '" + text + "' is not a valid date-time");
  }
  const std::int64_t days = days_from_civil(year, month, day);
  return (((days * 24 + hour) * 60 + minute) * 60 + second) * 1000 + millis;
}

std::string format_timestamp(std::int64_t timestamp_ms, const std::string& format) {
  std::int64_t rest = timestamp_ms;
  std::int64_t millis = rest % 1000;
  rest /= 1000;
  if (millis < 0) { millis += 1000; rest -= 1; }
  std::int64_t second = rest % 60;
  rest /= 60;
  if (second < 0) { second += 60; rest -= 1; }
  std::int64_t minute = rest % 60;
  rest /= 60;
  if (minute < 0) { minute += 60; rest -= 1; }
  std::int64_t hour = rest % 24;
  rest /= 24;
  if (hour < 0) { hour += 24; rest -= 1; }
  std::int64_t year, month, day;
  civil_from_days(rest, year, month, day);

  std::string out;
  char buf[24];
  for (const FormatToken& tok : tokenize_format(format)) {
    switch (tok.kind) {
      case FormatToken::yyyy: std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(year)); out += buf; break;
      case FormatToken::yy: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(year % 100)); out += buf; break;
      case FormatToken::MM: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(month)); out += buf; break;
      case FormatToken::dd: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(day)); out += buf; break;
      case FormatToken::HH: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(hour)); out += buf; break;
      case FormatToken::mm: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(minute)); out += buf; break;
      case FormatToken::ss: std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(second)); out += buf; break;
      case FormatToken::SSS: std::snprintf(buf, sizeof buf, "%03lld", static_cast<long long>(millis)); out += buf; break;
      case FormatToken::literal: out += tok.ch; break;
    }
  }
  return out;
}

bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;
  bool done = false;
  while (!done) {
    if (quoted) {
      if (c == EOF) throw DataError("unterminated quoted field at end of input");
      if (c == '"') {
        const int next = in.get();
        if (next == '"') {
          field += '"';
        } else {
          quoted = false;
          c = next;
          continue;
        }
      } else {
        field += static_cast<char>(c);
      }
    } else {
      switch (c) {
        case EOF:
          done = true;
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          break;
        case '\r': {
          const int next = in.get();
          if (next != '\n' && next != EOF) in.unget();
          done = true;
          break;
        }
        case '\n':
          done = true;
          break;
        case '"':
          if (field.empty()) {
            quoted = true;
          } else {
            field += '"';
          }
          break;
        default:
          field += static_cast<char>(c);
          break;
      }
    }
    if (!done) c = in.get();
  }
  fields.push_back(std::move(field));
  return true;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    const bool needs_quotes =
        f.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << "\"\"";
      else out << c;
    }
    out << '"';
  }
  out << '\n';
}

EventLog parse_csv(std::istream& in, const SchemaConfig& schema) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header)) throw DataError("empty input: no header row");

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError("missing column '" + name + "' in CSV header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t case_col = column(schema.case_column);
  const std::size_t act_col = column(schema.activity_column);
  const std::size_t ts_col = column(schema.timestamp_column);
  const std::size_t label_col = column(schema.label_column);

  struct Pending {
    std::vector<std::pair<std::int64_t, Event>> events;  // (timestamp, event)
    std::optional<int> label;
    std::size_t first_line = 0;
  };
  std::map<std::string, Pending> cases;
  std::vector<std::string> case_order;

  std::vector<std::string> row;
  std::size_t line = 1;
  while (read_csv_row(in, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size()) {
      throw DataError("line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(row.size()));
    }
    const std::string& case_id = row[case_col];
    const std::string& activity = row[act_col];
    if (case_id.empty()) {
      throw DataError("line " + std::to_string(line) + ": empty case id");
    }
    if (activity.empty()) {
      throw DataError("line " + std::to_string(line) + ": empty activity");
    }
    std::int64_t ts;
    try {
      ts = parse_timestamp(row[ts_col], schema.timestamp_format);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
    auto [it, inserted] = cases.try_emplace(case_id);
    if (inserted) {
      case_order.push_back(case_id);
      it->second.first_line = line;
    }
    Pending& p = it->second;
    p.events.push_back({ts, Event{activity, case_id, ts}});
    const std::string& label_text = row[label_col];
    if (!label_text.empty()) {
      const int value = label_text == schema.positive_label_value ? 1 : 0;
      if (p.label.has_value() && *p.label != value) {
        throw DataError("line " + std::to_string(line) + ": case '" + case_id +
                        "' has conflicting labels");
      }
      p.label = value;
    }
  }
  if (cases.empty()) throw DataError("empty input: no event rows");

  EventLog log;
  log.traces.reserve(case_order.size());
  for (const std::string& case_id : case_order) {
    Pending& p = cases.at(case_id);
    if (!p.label.has_value()) {
      throw DataError("case '" + case_id + "' (first seen on line " +
                      std::to_string(p.first_line) + ") has no label");
    }
    std::stable_sort(p.events.begin(), p.events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Trace trace;
    trace.case_id = case_id;
    trace.label = *p.label;
    trace.events.reserve(p.events.size());
    for (auto& [ts, ev] : p.events) trace.events.push_back(std::move(ev));
    log.traces.push_back(std::move(trace));
  }
  return log;
}

void write_csv(std::ostream& out, const EventLog& log, const SchemaConfig& schema) {
  if (schema.positive_label_value == "0") {
    throw ConfigError("positive_label_value '0' collides with the negative label");
  }
  write_csv_row(out, {schema.case_column, schema.activity_column,
                      schema.timestamp_column, schema.label_column});
  for (const Trace& t : log.traces) {
    const std::string label =
        t.label == 1 ? schema.positive_label_value : std::string("0");
    for (const Event& e : t.events) {
      write_csv_row(out, {e.case_id, e.activity,
                          format_timestamp(e.timestamp_ms, schema.timestamp_format),
                          label});
    }
  }
}

LogStats log_statistics(const EventLog& log) {
  if (log.traces.empty()) throw DataError("empty log: no statistics to compute");
  LogStats stats;
  stats.num_instances = log.traces.size();
  std::size_t positives = 0;
  for (const Trace& t : log.traces) {
    stats.num_events += t.events.size();
    stats.max_trace_length = std::max(stats.max_trace_length, t.events.size());
    positives += t.label == 1 ? 1 : 0;
  }
  stats.num_activities = log.activity_universe().size();
  stats.positive_pct = 100.0 * static_cast<double>(positives) /
                       static_cast<double>(stats.num_instances);
  stats.negative_pct = 100.0 - stats.positive_pct;
  return stats;
}

std::string format_stats_table(const LogStats& stats) {
  char buf[64];
  std::ostringstream out;
  auto row = [&](const char* name, const std::string& value) {
    out << name;
    for (std::size_t i = std::string(name).size(); i < 22; ++i) out << ' ';
    out << value << '\n';
  };
  row("instances", std::to_string(stats.num_instances));
  row("events", std::to_string(stats.num_events));
  row("activities", std::to_string(stats.num_activities));
  std::snprintf(buf, sizeof buf, "%.2f/%.2f", stats.positive_pct,
                stats.negative_pct);
  row("class split (+/-)", buf);
  row("max trace length", std::to_string(stats.max_trace_length));
  return out.str();
}

std::string format_stats_kv(const LogStats& stats) {
  char buf[64];
  std::ostringstream out;
  out << "instances=" << stats.num_instances << '\n';
  out << "events=" << stats.num_events << '\n';
  out << "activities=" << stats.num_activities << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", stats.positive_pct);
  out << "positive_pct=" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", stats.negative_pct);
  out << "negative_pct=" << buf << '\n';
  out << "max_trace_length=" << stats.max_trace_length << '\n';
  return out.str();
}

std::vector<FoldSplit> split_folds(const EventLog& log, std::size_t k,
                                   std::uint64_t seed,
                                   double validation_fraction) {
  const std::size_t n = log.traces.size();
  if (k < 2) throw ConfigError("split_folds needs k >= 2");
  if (k > n) {
    throw ConfigError("cannot make " + std::to_string(k) + " folds from " +
                      std::to_string(n) + " traces");
  }
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<FoldSplit> folds(k);
  std::size_t start = 0;
  std::vector<std::pair<std::size_t, std::size_t>> chunks(k);  // [begin, end)
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    chunks[f] = {start, start + size};
    start += size;
  }
  for (std::size_t f = 0; f < k; ++f) {
    FoldSplit& fold = folds[f];
    fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(chunks[f].first),
                     order.begin() + static_cast<std::ptrdiff_t>(chunks[f].second));
    std::vector<std::size_t> rest;
    rest.reserve(n - fold.test.size());
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      rest.insert(rest.end(),
                  order.begin() + static_cast<std::ptrdiff_t>(chunks[g].first),
                  order.begin() + static_cast<std::ptrdiff_t>(chunks[g].second));
    }
    const std::size_t val_size = static_cast<std::size_t>(
        static_cast<double>(rest.size()) * validation_fraction);
    Rng fold_rng(derive_seed(seed, f + 1));
    fold_rng.shuffle(rest);
    fold.validation.assign(rest.begin(),
                           rest.begin() + static_cast<std::ptrdiff_t>(val_size));
    fold.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(val_size),
                      rest.end());
  }
  return folds;
}

EventLog generate_synthetic_log(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.alphabet_size < 2) {
    throw ConfigError("synthetic log needs alphabet_size >= 2");
  }
  if (spec.mean_length < 1) {
    throw ConfigError("synthetic log needs mean_length >= 1");
  }
  if (spec.plant_rate <= 0.0 || spec.plant_rate >= 1.0) {
    throw ConfigError("plant_rate must be in (0, 1)");
  }
  if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0) {
    throw ConfigError("noise_rate must be in [0, 1]");
  }

  std::vector<std::string> alphabet(spec.alphabet_size);
  for (std::size_t i = 0; i < spec.alphabet_size; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "act_%02zu", i);
    alphabet[i] = buf;
  }
  std::vector<std::string> base;  // alphabet without the planted activity
  for (const std::string& a : alphabet) {
    if (a != spec.planted_activity) base.push_back(a);
  }
  if (base.size() == alphabet.size()) {
    throw ConfigError("planted_activity '" + spec.planted_activity +
                      "' is not in the generated alphabet");
  }

  const std::size_t lo = spec.mean_length > 2 ? spec.mean_length - 2 : 1;
  const std::size_t hi = spec.mean_length + 2;

  Rng rng(seed);
  EventLog log;
  log.traces.reserve(spec.num_traces);
  std::int64_t clock_ms = parse_timestamp("01.01.20 00:00:00", "dd.MM.yy HH:mm:ss");
  for (std::size_t i = 0; i < spec.num_traces; ++i) {
    Trace trace;
    trace.case_id = "case_" + std::to_string(i + 1);
    const std::size_t length = lo + rng.next_below(hi - lo + 1);
    std::vector<std::string> walk(length);
    for (std::size_t j = 0; j < length; ++j) {
      walk[j] = base[rng.next_below(base.size())];
    }
    const bool planted = rng.next_double() < spec.plant_rate;
    if (planted) {
      walk.insert(walk.begin() + static_cast<std::ptrdiff_t>(
                      rng.next_below(length + 1)),
                  spec.planted_activity);
    }
    trace.label = planted ? 1 : 0;
    if (spec.noise_rate > 0.0 && rng.next_double() < spec.noise_rate) {
      trace.label = 1 - trace.label;
    }
    trace.events.reserve(walk.size());
    for (const std::string& activity : walk) {
      trace.events.push_back(Event{activity, trace.case_id, clock_ms});
      clock_ms += 60'000;
    }
    log.traces.push_back(std::move(trace));
  }
  return log;
}

}  // namespace relmine
