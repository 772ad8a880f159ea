#include "qirt/io.hpp"

#include <fstream>
#include <sstream>

namespace qirt::io {

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error("matrix must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error("matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      const json& z = j[r][c];
      if (z.is_number()) m(r, c) = cd(z.get<double>(), 0.0);
      else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number())
        m(r, c) = cd(z[0].get<double>(), z[1].get<double>());
      else throw Error("complex entries must be [re, im] pairs");
    }
  }
  return m;
}

json povm_to_json(const Povm& m) {
  json e = json::array();
  for (const auto& x : m.elements()) e.push_back(matrix_to_json(x));
  return {{"format", "povm.v1"}, {"dim", m.dim()}, {"labels", m.labels()}, {"elements", e}};
}

Povm povm_from_json(const json& j) {
  if (!j.is_object() || !j.contains("elements")) throw Error("povm.v1 object needs 'elements'");
  std::vector<ComplexMatrix> e;
  for (const auto& x : j.at("elements")) e.push_back(matrix_from_json(x));
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  Povm m(e, labels);
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != m.dim()) throw Error("povm.v1 'dim' disagrees with elements");
  return m;
}

json instrument_to_json(const Instrument& inst) {
  json b = json::array();
  for (const auto& m : inst.branches()) b.push_back(matrix_to_json(m.choi()));
  return {{"format", "instrument.v1"},
          {"dim_in", inst.dim_in()},
          {"dim_out", inst.dim_out()},
          {"labels", inst.labels()},
          {"branches", b}};
}

Instrument instrument_from_json(const json& j) {
  if (!j.is_object()) throw Error("instrument.v1 must be an object");
  for (const char* k : {"dim_in", "dim_out", "branches"})
    if (!j.contains(k)) throw Error(std::string("instrument.v1 object needs '") + k + "'");
  if (j.contains("format") && j.at("format") != "instrument.v1") throw Error("unsupported format tag");
  const auto din = j.at("dim_in").get<std::size_t>();
  const auto dout = j.at("dim_out").get<std::size_t>();
  std::vector<ComplexMatrix> chois;
  for (const auto& b : j.at("branches")) chois.push_back(matrix_from_json(b));
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return Instrument::from_chois(din, dout, chois, labels);
}

json instrument_set_to_json(const InstrumentSet& set) {
  json a = json::array();
  for (const auto& i : set) a.push_back(instrument_to_json(i));
  return a;
}

InstrumentSet instrument_set_from_json(const json& j) {
  InstrumentSet out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(instrument_from_json(x));
  } else {
    out.push_back(instrument_from_json(j));
  }
  return out;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into line and column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + e.what(),
                     line, col);
  }
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qirt::io
