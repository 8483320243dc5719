#include <cstdio>
#include <fstream>
#include <sstream>

#include "fibrehom/io.hpp"

namespace fibrehom::io {

namespace {

class LineError {
 public:
  LineError(const std::string& origin, int line) : prefix_(origin + ":" + std::to_string(line) + ": ") {}
  [[noreturn]] void fail(const std::string& msg) const { throw InputError(prefix_ + msg); }

 private:
  std::string prefix_;
};

double parse_number(const std::string& token, const LineError& err, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    err.fail("cannot parse " + field + " '" + token + "'");
  }
  if (used != token.size()) err.fail("trailing characters in " + field + " '" + token + "'");
  return v;
}

int parse_int(const std::string& token, const LineError& err, const std::string& field) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(token, &used);
  } catch (const std::exception&) {
    err.fail("cannot parse " + field + " '" + token + "'");
  }
  if (used != token.size()) err.fail("trailing characters in " + field + " '" + token + "'");
  return v;
}

Complex parse_entry(const std::string& token, const LineError& err, int index) {
  const std::string field = "entry " + std::to_string(index + 1);
  const auto comma = token.find(',');
  if (comma == std::string::npos) return {parse_number(token, err, field), 0.0};
  return {parse_number(token.substr(0, comma), err, field + " (real part)"),
          parse_number(token.substr(comma + 1), err, field + " (imaginary part)")};
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

fourier::CoefficientField parse_coefficient(const std::string& text, const std::string& origin) {
  fourier::CoefficientField coef;
  coef.modes.clear();
  bool have_dim = false, have_shape = false, have_nu = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError err(origin, line_no);
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);

    if (key == "dimension") {
      if (tokens.size() != 1) err.fail("dimension takes one value");
      coef.d = parse_int(tokens[0], err, "dimension");
      if (coef.d < 1 || coef.d > 3) err.fail("dimension must be 1, 2 or 3");
      have_dim = true;
    } else if (key == "shape") {
      if (tokens.size() != 2) err.fail("shape takes rows and cols");
      coef.rows = parse_int(tokens[0], err, "rows");
      coef.cols = parse_int(tokens[1], err, "cols");
      if (coef.rows < 1 || coef.cols < 1) err.fail("shape must be positive");
      have_shape = true;
    } else if (key == "nu") {
      if (tokens.size() != 1) err.fail("nu takes one value");
      coef.declared_nu = parse_number(tokens[0], err, "nu");
      have_nu = true;
    } else if (key == "real") {
      if (tokens.size() != 1 || (tokens[0] != "true" && tokens[0] != "false")) err.fail("real must be true or false");
      coef.real_valued = tokens[0] == "true";
    } else if (key == "mode") {
      if (!have_dim || !have_shape) err.fail("mode line before dimension and shape");
      const std::size_t entries = static_cast<std::size_t>(coef.rows * coef.cols);
      if (tokens.size() != static_cast<std::size_t>(coef.d) + 1 + entries || tokens[static_cast<std::size_t>(coef.d)] != ":") {
        err.fail("mode line needs " + std::to_string(coef.d) + " lattice indices, ':' and " +
                 std::to_string(entries) + " entries");
      }
      fourier::LatticePoint w{0, 0, 0};
      for (int j = 0; j < coef.d; ++j) w[static_cast<std::size_t>(j)] = parse_int(tokens[static_cast<std::size_t>(j)], err, "lattice index " + std::to_string(j + 1));
      if (coef.modes.count(w)) err.fail("mode listed twice");
      CMatrix block(coef.rows, coef.cols);
      for (std::size_t e = 0; e < entries; ++e) {
        block(static_cast<Index>(e) / coef.cols, static_cast<Index>(e) % coef.cols) =
            parse_entry(tokens[static_cast<std::size_t>(coef.d) + 1 + e], err, static_cast<int>(e));
      }
      coef.modes[w] = block;
    } else {
      err.fail("unknown keyword '" + key + "'");
    }
  }
  if (!have_dim || !have_shape || !have_nu) throw InputError(origin + ": dimension, shape and nu are required");
  if (coef.modes.empty()) throw InputError(origin + ": no mode lines");
  return coef;
}

fourier::CoefficientField load_coefficient(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open coefficient file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  fourier::CoefficientField coef = parse_coefficient(ss.str(), path.string());
  fourier::validate_coefficient(coef);
  return coef;
}

std::string format_coefficient(const fourier::CoefficientField& coef) {
  std::string out;
  out += "dimension " + std::to_string(coef.d) + "\n";
  out += "shape " + std::to_string(coef.rows) + " " + std::to_string(coef.cols) + "\n";
  out += "nu " + number(coef.declared_nu) + "\n";
  out += std::string("real ") + (coef.real_valued ? "true" : "false") + "\n";
  for (const auto& [w, block] : coef.modes) {
    out += "mode";
    for (int j = 0; j < coef.d; ++j) out += " " + std::to_string(w[static_cast<std::size_t>(j)]);
    out += " :";
    for (Index i = 0; i < block.rows(); ++i) {
      for (Index j = 0; j < block.cols(); ++j) {
        out += " " + number(block(i, j).real());
        if (block(i, j).imag() != 0.0) out += "," + number(block(i, j).imag());
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace fibrehom::io
