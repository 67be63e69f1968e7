#include "prescurv/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace prescurv {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw Error(ErrorKind::ParseError, "empty field on line " + std::to_string(line));
  const char* first = s.data() + b;
  const char* last = s.data() + e + 1;
  if (*first == '+') ++first;
  double v = 0.0;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(ErrorKind::ParseError, "bad number '" + s + "' on line " + std::to_string(line));
  return v;
}

bool is_closed(const Eigen::MatrixXd& pts) {
  const Eigen::Index n = pts.rows();
  if (n < 4) return false;
  const double scale = pts.cwiseAbs().maxCoeff();
  return (pts.row(0) - pts.row(n - 1)).norm() <= 1e-12 * std::max(scale, 1.0);
}

}  // namespace

void write_curve_csv(std::ostream& os, const ParamCurve& f) {
  os << 't';
  for (int i = 1; i <= f.dim(); ++i) os << ",x" << i;
  os << '\n';
  const int rows = f.node_count() + (f.domain().periodic() ? 1 : 0);
  for (int j = 0; j < rows; ++j) {
    const int k = j % f.node_count();
    const double t = (j == rows - 1) ? f.domain().b : f.param(j);
    os << fmt(t);
    for (int i = 0; i < f.dim(); ++i) os << ',' << fmt(f.samples()(k, i));
    os << '\n';
  }
}

void write_curve_csv(const std::string& path, const ParamCurve& f) {
  std::ostringstream os;
  write_curve_csv(os, f);
  write_text(path, os.str());
}

ParamCurve read_curve_csv(std::istream& is, int smoothness_order) {
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw Error(ErrorKind::ParseError, "empty file");
  ++lineno;
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t")
    throw Error(ErrorKind::ParseError, "line 1: header must be t,x1,...,xn");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i))
      throw Error(ErrorKind::ParseError, "line 1: unexpected column '" + header[i] + "'");
  const int dim = static_cast<int>(header.size()) - 1;
  std::vector<double> ts;
  std::vector<double> xs;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (static_cast<int>(f.size()) != dim + 1)
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(dim + 1) + " fields, got " +
                                             std::to_string(f.size()));
    ts.push_back(parse_double(f[0], lineno));
    for (int i = 1; i <= dim; ++i) xs.push_back(parse_double(f[i], lineno));
  }
  const int n = static_cast<int>(ts.size());
  if (n < 3) throw Error(ErrorKind::ParseError, "need at least three rows");
  const double h = (ts.back() - ts.front()) / (n - 1);
  if (!(h > 0)) throw Error(ErrorKind::ParseError, "parameter must increase");
  for (int j = 0; j < n; ++j)
    if (std::abs(ts[j] - (ts.front() + j * h)) > 1e-9 * std::max(1.0, std::abs(ts.back())))
      throw Error(ErrorKind::ParseError, "line " + std::to_string(j + 2) + ": parameter is not uniform");
  Eigen::MatrixXd pts(n, dim);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) pts(j, i) = xs[static_cast<std::size_t>(j) * dim + i];
  if (is_closed(pts)) {
    Eigen::MatrixXd open = pts.topRows(n - 1);
    return ParamCurve(Domain::circle(ts.front(), ts.back()), std::move(open), smoothness_order);
  }
  return ParamCurve(Domain::interval(ts.front(), ts.back()), std::move(pts), smoothness_order);
}

ParamCurve read_curve_csv(const std::string& path, int smoothness_order) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_curve_csv(in, smoothness_order);
}

nlohmann::json domain_to_json(const Domain& d) {
  return {{"kind", d.periodic() ? "circle" : "interval"}, {"a", d.a}, {"b", d.b}};
}

Domain domain_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double a = j.at("a").get<double>();
  const double b = j.at("b").get<double>();
  if (kind == "circle") return Domain::circle(a, b);
  if (kind == "interval") return Domain::interval(a, b);
  throw Error(ErrorKind::ParseError, "unknown domain kind '" + kind + "'");
}

nlohmann::json curve_to_json(const ParamCurve& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (int j = 0; j < f.node_count(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < f.dim(); ++i) row.push_back(f.samples()(j, i));
    pts.push_back(std::move(row));
  }
  return {{"domain", domain_to_json(f.domain())}, {"points", std::move(pts)}};
}

ParamCurve curve_from_json(const nlohmann::json& j, int smoothness_order) {
  try {
    const Domain d = domain_from_json(j.at("domain"));
    const auto& pts = j.at("points");
    const int n = static_cast<int>(pts.size());
    if (n == 0) throw Error(ErrorKind::ParseError, "no points");
    const int dim = static_cast<int>(pts[0].size());
    Eigen::MatrixXd s(n, dim);
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(pts[r].size()) != dim) throw Error(ErrorKind::ParseError, "ragged point array");
      for (int i = 0; i < dim; ++i) s(r, i) = pts[r][i].get<double>();
    }
    return ParamCurve(d, std::move(s), smoothness_order);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

void write_obj(std::ostream& os, const ParamCurve& f) {
  for (int j = 0; j < f.node_count(); ++j) {
    os << 'v';
    for (int i = 0; i < 3; ++i) os << ' ' << fmt(i < f.dim() ? f.samples()(j, i) : 0.0);
    os << '\n';
  }
  os << 'l';
  for (int j = 1; j <= f.node_count(); ++j) os << ' ' << j;
  if (f.domain().periodic()) os << " 1";
  os << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace prescurv
