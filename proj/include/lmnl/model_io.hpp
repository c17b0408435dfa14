#pragma once

#include <filesystem>
#include <iosfwd>

#include "lmnl/models.hpp"

namespace lmnl {

// Line-oriented text format, one record per line, reals printed with 17
// significant digits so a save/load round trip is exact:
//
//   lmnl-model 1
//   kind <logit|dnn|dnn_l|lmnl|lnl|dummy_logit>
//   alternatives <C> <name>...
//   parameter <name> <value>                (one per beta entry, in order)
//   term <parameter> <alternative> <column|->   ("-" marks an intercept)
//   x <K> <column>...
//   q <K> <column>...
//   layers <L>
//   layer <identity|relu> <out> <in>        followed by <out> lines of <in>
//                                           weights and one line of <out> biases
//   nests <M>
//   nest <mu> <fixed 0|1> <size> <alternative>...
//   end
//
// Names must not contain whitespace.
void save_model(const HybridChoiceModel& model, std::ostream& os);
void save_model(const HybridChoiceModel& model, const std::filesystem::path& path);
HybridChoiceModel load_model(std::istream& is);
HybridChoiceModel load_model(const std::filesystem::path& path);

}  // namespace lmnl
