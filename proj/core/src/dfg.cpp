#include "relmine/dfg.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "relmine/error.hpp"

namespace relmine {

Dfg mine_dfg(const EventLog& log) {
  if (log.traces.empty()) throw DataError("cannot mine a DFG from an empty log");
  Dfg d;
  for (const Trace& t : log.traces) {
    for (const Event& e : t.events) ++d.activity_counts[e.activity];
    for (std::size_t i = 0; i + 1 < t.events.size(); ++i) {
      ++d.edge_counts[{t.events[i].activity, t.events[i + 1].activity}];
    }
    ++d.start_counts[t.events.front().activity];
    ++d.end_counts[t.events.back().activity];
  }
  return d;
}

AnnotatedDfg annotate_dfg(const Dfg& d, const AnnotationMap& ann) {
  AnnotatedDfg out;
  out.graph = d;
  out.kind = ann.kind;
  if (ann.kind == AnnotationKind::frequency) {
    std::size_t lo = 0, hi = 0;
    bool first = true;
    for (const auto& [activity, count] : d.activity_counts) {
      if (first) { lo = hi = count; first = false; }
      lo = std::min(lo, count);
      hi = std::max(hi, count);
    }
    for (const auto& [activity, count] : d.activity_counts) {
      out.display[activity] = static_cast<double>(count);
      out.intensity[activity] =
          hi == lo ? 0.5
                   : static_cast<double>(count - lo) / static_cast<double>(hi - lo);
    }
  } else {
    for (const auto& [activity, count] : d.activity_counts) {
      const auto it = ann.values.find(activity);
      const double value = it == ann.values.end() ? 0.0 : it->second;
      out.display[activity] = value;
      out.intensity[activity] = value;
    }
  }
  return out;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const AnnotatedDfg& g, const DotOptions& options) {
  std::ostringstream out;
  char buf[64];
  out << "digraph {\n";
  out << "  rankdir=TB\n";
  for (const auto& [activity, count] : g.graph.activity_counts) {
    const auto disp_it = g.display.find(activity);
    const auto int_it = g.intensity.find(activity);
    const double display = disp_it == g.display.end() ? 0.0 : disp_it->second;
    const double intensity = int_it == g.intensity.end() ? 0.0 : int_it->second;
    std::string value;
    if (g.kind == AnnotationKind::frequency) {
      value = std::to_string(static_cast<long long>(display));
    } else {
      std::snprintf(buf, sizeof buf, "%.2f", display);
      value = buf;
    }
    std::snprintf(buf, sizeof buf, "%.2f", 0.15 + 0.85 * intensity);
    out << "  \"" << dot_escape(activity) << "\" [label=\""
        << dot_escape(activity) << "\\n(" << value
        << ")\", style=filled, fillcolor=\"0.60 " << buf << " 1.0\"]\n";
  }
  out << "  \"__start\" [shape=point]\n";
  out << "  \"__end\" [shape=point]\n";

  std::size_t max_count = 0;
  for (const auto& [pair, count] : g.graph.edge_counts) {
    if (count >= options.min_edge_count) max_count = std::max(max_count, count);
  }
  for (const auto& [pair, count] : g.graph.edge_counts) {
    if (count < options.min_edge_count) continue;
    std::snprintf(buf, sizeof buf, "%.2f",
                  1.0 + 4.0 * static_cast<double>(count) /
                            static_cast<double>(max_count));
    out << "  \"" << dot_escape(pair.first) << "\" -> \""
        << dot_escape(pair.second) << "\" [penwidth=" << buf << "]\n";
  }
  for (const auto& entry : g.graph.start_counts) {
    out << "  \"__start\" -> \"" << dot_escape(entry.first) << "\"\n";
  }
  for (const auto& entry : g.graph.end_counts) {
    out << "  \"" << dot_escape(entry.first) << "\" -> \"__end\"\n";
  }
  out << "}\n";
  return out.str();
}

void write_dfg_counts_csv(std::ostream& out, const Dfg& d) {
  write_csv_row(out, {"kind", "source", "target", "count"});
  for (const auto& [activity, count] : d.activity_counts) {
    write_csv_row(out, {"activity", activity, "", std::to_string(count)});
  }
  for (const auto& [pair, count] : d.edge_counts) {
    write_csv_row(out, {"edge", pair.first, pair.second, std::to_string(count)});
  }
  for (const auto& [activity, count] : d.start_counts) {
    write_csv_row(out, {"start", activity, "", std::to_string(count)});
  }
  for (const auto& [activity, count] : d.end_counts) {
    write_csv_row(out, {"end", activity, "", std::to_string(count)});
  }
}

}  // namespace relmine
