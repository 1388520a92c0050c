#pragma once

#include <iosfwd>
#include <string>

#include "relmine/ggnn.hpp"
#include "relmine/instance_graph.hpp"

namespace relmine {

struct LoadedModel {
  GgnnParams params;
  ActivityVocabulary vocab;
};

// Versioned JSON document holding the hidden dimension, step count, readout
// mode, activity vocabulary, and every parameter block as {rows, cols, data}
// with row-major values printed to 17 significant digits, so numbers survive
// a write/read round trip bit for bit.
void write_model(std::ostream& out, const GgnnParams& params,
                 const ActivityVocabulary& vocab);
LoadedModel read_model(std::istream& in);

void save_model_file(const std::string& path, const GgnnParams& params,
                     const ActivityVocabulary& vocab);
LoadedModel load_model_file(const std::string& path);

}  // namespace relmine
