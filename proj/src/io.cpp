#include "obstlab/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace obstlab {

namespace {

double to_number(const std::string& t, int line)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument("measure line " + std::to_string(line) + ": bad number '" + t + "'");
  return v;
}

Point read_point(const std::vector<std::string>& tok, std::size_t& pos, int dim, int line)
{
  Point p = Point::Zero();
  for (int i = 0; i < dim; ++i) {
    if (pos >= tok.size())
      throw std::invalid_argument("measure line " + std::to_string(line) + ": missing coordinate");
    p[i] = to_number(tok[pos++], line);
  }
  return p;
}

} // namespace

std::string format_number(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Measure read_measure(std::istream& is)
{
  int dim = 2;
  std::optional<Box> domain;
  std::optional<Measure> mu;
  auto ensure = [&]() -> Measure& {
    if (!mu)
      mu.emplace(domain ? *domain : Box::unit(dim));
    return *mu;
  };

  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;)
      tok.push_back(t);
    if (tok.empty())
      continue;
    const std::string& key = tok[0];
    std::size_t pos = 1;
    auto done = [&]() {
      if (pos != tok.size())
        throw std::invalid_argument("measure line " + std::to_string(line) + ": trailing tokens");
    };
    if (key == "dimension" || key == "domain") {
      if (mu)
        throw std::invalid_argument("measure line " + std::to_string(line) + ": '" + key + "' after charges");
      if (key == "dimension") {
        if (tok.size() != 2 || (tok[1] != "2" && tok[1] != "3"))
          throw std::invalid_argument("measure line " + std::to_string(line) + ": dimension must be 2 or 3");
        dim = tok[1] == "2" ? 2 : 3;
        domain.reset();
      } else {
        const Point lo = read_point(tok, pos, dim, line);
        const Point hi = read_point(tok, pos, dim, line);
        done();
        domain = Box(dim, lo, hi);
      }
    } else if (key == "atom") {
      if (tok.size() < 2)
        throw std::invalid_argument("measure line " + std::to_string(line) + ": atom needs a mass");
      const double mass = to_number(tok[pos++], line);
      const Point p = read_point(tok, pos, dim, line);
      done();
      ensure().add_atom(p, mass);
    } else if (key == "curve") {
      if (tok.size() < 2)
        throw std::invalid_argument("measure line " + std::to_string(line) + ": curve needs a density");
      const double rho = to_number(tok[pos++], line);
      std::vector<Point> poly;
      while (pos < tok.size())
        poly.push_back(read_point(tok, pos, dim, line));
      ensure().add_curve(std::move(poly), rho);
    } else if (key == "density") {
      const Density f = Density::parse(tok, pos, dim);
      done();
      ensure().add_density(f);
    } else {
      throw std::invalid_argument("measure line " + std::to_string(line) + ": unknown record '" + key + "'");
    }
  }
  return mu ? *mu : Measure(domain ? *domain : Box::unit(dim));
}

Measure read_measure_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open measure file '" + path + "'");
  return read_measure(in);
}

void write_measure(std::ostream& os, const Measure& mu)
{
  const int dim = mu.dim();
  auto point = [&](const Point& p) {
    for (int i = 0; i < dim; ++i)
      os << ' ' << format_number(p[i]);
  };
  os << "dimension " << dim << "\ndomain";
  point(mu.domain().lower);
  point(mu.domain().upper);
  os << '\n';
  for (const Atom& a : mu.atoms()) {
    os << "atom " << format_number(a.mass);
    point(a.location);
    os << '\n';
  }
  for (const CurvePiece& c : mu.curves()) {
    os << "curve " << format_number(c.linear_density);
    for (const Point& p : c.polyline)
      point(p);
    os << '\n';
  }
  if (mu.diffuse())
    os << "density " << mu.diffuse()->serialize() << '\n';
}

void write_summary(std::ostream& os, const Summary& summary)
{
  for (const auto& [k, v] : summary)
    os << k << '=' << v << '\n';
}

} // namespace obstlab
