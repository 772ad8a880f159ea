#pragma once

#include <string>

#include <json.hpp>

#include "qirt/qobjects.hpp"

namespace qirt::io {

using json = nlohmann::json;

// Complex scalars are [re, im]; matrices are arrays of rows.
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json povm_to_json(const Povm& m);
Povm povm_from_json(const json& j);
json instrument_to_json(const Instrument& inst);
Instrument instrument_from_json(const json& j);
// A set is either one instrument.v1 object or an array of them.
json instrument_set_to_json(const InstrumentSet& set);
InstrumentSet instrument_set_from_json(const json& j);

// Parses text, reporting malformed input as ParseError with line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};
json parse_text(const std::string& text);
json read_file(const std::string& path);
void write_file(const std::string& path, const json& j);

}  // namespace qirt::io
