#include "regvb/model_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "regvb/corpus.hpp"

namespace regvb {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

void write_rows(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << format_double(row[c]);
    out << '\n';
  }
}

bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

void parse_row(const std::string& line, Matrix& m, std::size_t r, std::size_t lineno) {
  std::istringstream ss(line);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!(ss >> m(r, c))) throw ParseError("model file: row too short", lineno);
  }
  std::string rest;
  if (ss >> rest) throw ParseError("model file: row too long", lineno);
}

// Reads `rows` rows; when `first` is given it is used as the first row's text.
Matrix read_rows(std::istream& in, std::size_t rows, std::size_t cols, std::size_t& lineno,
                 const std::string* first = nullptr) {
  Matrix m(rows, cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (r == 0 && first) {
      parse_row(*first, m, r, lineno);
      continue;
    }
    if (!next_line(in, line, lineno)) throw ParseError("model file: expected " + std::to_string(rows) + " rows", lineno);
    parse_row(line, m, r, lineno);
  }
  return m;
}

}  // namespace

void write_standard_model(std::ostream& out, const StandardModel& model, bool with_beta) {
  out << model.hyper.K << ' ' << model.lambda.cols() << ' ' << format_double(model.hyper.alpha) << ' '
      << format_double(model.hyper.eta) << '\n';
  write_rows(out, model.lambda);
  if (with_beta) write_rows(out, model.beta());
}

void write_regularized_model(std::ostream& out, const RegularizedModel& model, const std::string& c_path) {
  out << model.hyper.K << ' ' << model.nu.cols() << ' ' << format_double(model.hyper.alpha) << ' '
      << format_double(model.hyper.eta) << ' ' << model.reg_iter << '\n';
  out << "C " << c_path << '\n';
  write_rows(out, model.nu);
  write_rows(out, model.beta());
}

LoadedModel read_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw ParseError("model file: empty", lineno);
  std::istringstream header(line);
  std::vector<std::string> fields;
  for (std::string f; header >> f;) fields.push_back(f);
  if (fields.size() != 4 && fields.size() != 5) throw ParseError("model file: malformed header", lineno);
  LoadedModel m;
  std::size_t W = 0;
  try {
    m.hyper.K = std::stoul(fields[0]);
    W = std::stoul(fields[1]);
    m.hyper.alpha = std::stod(fields[2]);
    m.hyper.eta = std::stod(fields[3]);
    if (fields.size() == 5) m.reg_iter = std::stoul(fields[4]);
  } catch (const std::exception&) {
    throw ParseError("model file: malformed header", lineno);
  }
  m.regularized = fields.size() == 5;
  if (m.regularized) {
    if (!next_line(in, line, lineno) || line.rfind("C ", 0) != 0) throw ParseError("model file: expected 'C <path>'", lineno);
    m.c_path = line.substr(2);
    while (!m.c_path.empty() && (m.c_path.back() == '\r' || m.c_path.back() == ' ')) m.c_path.pop_back();
  }
  m.params = read_rows(in, m.hyper.K, W, lineno);
  if (next_line(in, line, lineno)) {
    m.beta = read_rows(in, m.hyper.K, W, lineno, &line);
  } else if (m.regularized) {
    throw ParseError("model file: regularized model is missing beta rows", lineno);
  }
  return m;
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return read_model(in);
}

void write_trace_csv(std::ostream& out, std::span<const UpdateRecord> trace) {
  out << "update,rho,batch_size,bound,grt\n";
  for (const auto& r : trace) {
    out << r.t << ',' << format_double(r.rho) << ',' << r.batch_size << ',' << format_double(r.bound) << ','
        << format_double(r.grt) << '\n';
  }
}

}  // namespace regvb
