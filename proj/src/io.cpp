#include "betacnmf/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "betacnmf/errors.hpp"

namespace betacnmf {

namespace {

std::size_t parse_count(const std::string& token, const char* what) {
  std::size_t value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(std::string("invalid ") + what + " '" + token + "'");
  }
  return value;
}

std::string next_token(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) throw ParseError(std::string("unexpected end of input reading ") + what);
  return token;
}

NonnegMatrix read_body(std::istream& in, std::size_t rows, std::size_t cols) {
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    v = parse_double(next_token(in, "matrix entry"));
    if (!(v >= 0.0)) throw ParseError("matrix entries must be nonnegative");
  }
  return NonnegMatrix(rows, cols, std::move(data));
}

void write_body(std::ostream& out, const NonnegMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("invalid number '" + text + "'");
  return value;
}

void write_nmat(std::ostream& out, const NonnegMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  write_body(out, m);
}

NonnegMatrix read_nmat(std::istream& in) {
  const std::size_t rows = parse_count(next_token(in, "row count"), "row count");
  const std::size_t cols = parse_count(next_token(in, "column count"), "column count");
  if (rows == 0 || cols == 0) throw ParseError("matrix dimensions must be positive");
  NonnegMatrix m = read_body(in, rows, cols);
  std::string extra;
  if (in >> extra) throw ParseError("trailing data after matrix: '" + extra + "'");
  return m;
}

void write_dictionary(std::ostream& out, const ConvDictionary& W) {
  out << W.rows() << ' ' << W.rank() << ' ' << W.lags() << '\n';
  for (const auto& slice : W.slices()) write_nmat(out, slice);
}

ConvDictionary read_dictionary(std::istream& in) {
  const std::size_t K = parse_count(next_token(in, "K"), "K");
  const std::size_t I = parse_count(next_token(in, "I"), "I");
  const std::size_t M = parse_count(next_token(in, "M"), "M");
  if (K == 0 || I == 0 || M == 0) throw ParseError("dictionary dimensions must be positive");
  std::vector<NonnegMatrix> slices;
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t rows = parse_count(next_token(in, "row count"), "row count");
    const std::size_t cols = parse_count(next_token(in, "column count"), "column count");
    if (rows != K || cols != I) throw ParseError("dictionary slice shape disagrees with header");
    slices.push_back(read_body(in, rows, cols));
  }
  std::string extra;
  if (in >> extra) throw ParseError("trailing data after dictionary: '" + extra + "'");
  return ConvDictionary(std::move(slices));
}

NonnegMatrix load_nmat(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_nmat(in);
}

void save_nmat(const std::filesystem::path& path, const NonnegMatrix& m) {
  auto out = open_out(path);
  write_nmat(out, m);
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

ConvDictionary load_dictionary(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dictionary(in);
}

void save_dictionary(const std::filesystem::path& path, const ConvDictionary& W) {
  auto out = open_out(path);
  write_dictionary(out, W);
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

void write_trace_csv(std::ostream& out, const std::vector<LossTrace>& traces) {
  out << kTraceHeader << '\n';
  for (const auto& trace : traces) {
    const std::string prefix = std::to_string(trace.run_id) + ',' + trace.method + ',' +
                               format_double(trace.beta) + ',';
    for (const auto& rec : trace.records) {
      out << prefix << rec.iteration << ',' << format_double(rec.loss) << ',' << rec.elapsed_ns
          << '\n';
    }
  }
}

std::vector<LossTrace> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ParseError("trace file must start with '" + std::string(kTraceHeader) + "'");
  }
  std::map<std::tuple<std::uint64_t, std::string, double>, std::size_t> index;
  std::vector<LossTrace> traces;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw ParseError("trace line " + std::to_string(line_no) + ": expected 6 fields");
    try {
      const std::uint64_t run_id = parse_count(f[0], "run_id");
      const double beta = parse_double(f[2]);
      const auto key = std::make_tuple(run_id, f[1], beta);
      auto [it, inserted] = index.try_emplace(key, traces.size());
      if (inserted) {
        LossTrace t;
        t.run_id = run_id;
        t.method = f[1];
        t.beta = beta;
        traces.push_back(std::move(t));
      }
      std::int64_t elapsed = 0;
      auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), elapsed);
      if (ec != std::errc() || ptr != f[5].data() + f[5].size()) throw ParseError("elapsed_ns");
      traces[it->second].records.push_back(
          {parse_count(f[3], "iteration"), parse_double(f[4]), elapsed});
    } catch (const ParseError& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return traces;
}

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows) {
  out << kStatsHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.beta) << ',' << r.iteration << ','
        << format_double(r.mean_loss) << ',' << format_double(r.std_loss) << ',' << r.n << '\n';
  }
}

void write_welch_csv(std::ostream& out, const std::vector<WelchRow>& rows) {
  out << kWelchHeader << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.method_a << ',' << r.method_b << ','
        << format_double(r.result.t_statistic) << ','
        << format_double(r.result.degrees_of_freedom) << ',' << format_double(r.result.p_value)
        << '\n';
  }
}

void write_runtime_csv(std::ostream& out, const std::vector<RuntimeRow>& rows) {
  out << kRuntimeHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.beta) << ',' << format_double(r.mean_ns) << ','
        << format_double(r.ratio) << '\n';
  }
}

}  // namespace betacnmf
