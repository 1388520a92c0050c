#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relmine/numerics.hpp"

namespace relmine {

struct Event {
  std::string activity;
  std::string case_id;
  std::int64_t timestamp_ms = 0;  // milliseconds since Unix epoch
};

struct Trace {
  std::string case_id;
  std::vector<Event> events;  // ordered by timestamp (stable on ties)
  int label = 0;              // 1 = positive class
};

struct EventLog {
  std::vector<Trace> traces;

  // Distinct activity names across all traces, lexicographically sorted.
  std::vector<std::string> activity_universe() const;
};

struct LogStats {
  std::size_t num_instances = 0;
  std::size_t num_events = 0;
  std::size_t num_activities = 0;
  double positive_pct = 0.0;  // positive_pct + negative_pct == 100
  double negative_pct = 0.0;
  std::size_t max_trace_length = 0;
};

// Column names and value conventions for CSV event logs.
struct SchemaConfig {
  std::string case_column = "case";
  std::string activity_column = "activity";
  std::string timestamp_column = "timestamp";
  std::string label_column = "label";
  std::string timestamp_format = "dd.MM.yy HH:mm:ss";
  std::string positive_label_value = "1";
};

// Trace indices into an EventLog for one cross-validation fold.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct SynthSpec {
  std::size_t num_traces = 1000;
  std::size_t alphabet_size = 8;
  std::size_t mean_length = 6;
  std::string planted_activity = "act_00";
  double plant_rate = 0.3;
  double noise_rate = 0.0;
};

// Timestamp pattern tokens: yyyy yy MM dd HH mm ss SSS. Anything else in the
// pattern must match the input literally. Two-digit years map to 2000+yy.
std::int64_t parse_timestamp(const std::string& text, const std::string& format);
std::string format_timestamp(std::int64_t timestamp_ms, const std::string& format);

// RFC 4180 row reader used by parse_csv; exposed for tests.
// Returns false at end of input. Throws DataError on unterminated quotes.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Reads a CSV event log. Groups rows by case, sorts each trace by timestamp
// (stable, so equal timestamps keep file order), and takes the case label
// from any row of the case that carries one. Conflicting labels within a
// case, missing required columns, and unparsable timestamps raise DataError
// with a 1-based line number.
EventLog parse_csv(std::istream& in, const SchemaConfig& schema);

// Inverse of parse_csv: one row per event, labels on every row. Negative
// traces get label "0"; throws ConfigError if positive_label_value is "0".
void write_csv(std::ostream& out, const EventLog& log, const SchemaConfig& schema);

LogStats log_statistics(const EventLog& log);
std::string format_stats_table(const LogStats& stats);
std::string format_stats_kv(const LogStats& stats);

// Shuffles trace indices (Fisher-Yates under the given seed), deals them into
// k contiguous chunks (sizes n/k, the first n%k chunks one larger), then for
// fold f uses chunk f as test and carves validation_fraction of the remainder
// (at least one trace, chosen under a seed derived per fold) for validation.
std::vector<FoldSplit> split_folds(const EventLog& log, std::size_t k,
                                   std::uint64_t seed,
                                   double validation_fraction = 0.1);

// Labeled random-walk log with one planted marker activity. Activities are
// act_00..act_NN; the planted one appears in a trace with probability
// plant_rate (label 1), otherwise the trace avoids it (label 0); labels are
// then flipped independently with probability noise_rate.
EventLog generate_synthetic_log(const SynthSpec& spec, std::uint64_t seed);

}  // namespace relmine
