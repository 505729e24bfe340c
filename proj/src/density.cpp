#include "obstlab/density.hpp"

#include "obstlab/kernels.hpp"
#include "obstlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace obstlab {

Box::Box(int dim_, const Point& lower_, const Point& upper_) : dim(dim_), lower(lower_), upper(upper_)
{
  check_dimension(dim);
  for (int i = 0; i < dim; ++i)
    if (!(upper[i] > lower[i]))
      throw std::invalid_argument("Box: degenerate extent");
  if (dim == 2) {
    lower[2] = 0.0;
    upper[2] = 0.0;
  }
}

Box Box::unit(int dim)
{
  Point hi = Point::Ones();
  return Box(dim, Point::Zero(), hi);
}

bool Box::contains(const Point& p) const
{
  for (int i = 0; i < dim; ++i)
    if (!(p[i] > lower[i] && p[i] < upper[i]))
      return false;
  return dim == 3 || p[2] == 0.0;
}

bool Box::contains_closed(const Point& p) const
{
  for (int i = 0; i < dim; ++i)
    if (!(p[i] >= lower[i] && p[i] <= upper[i]))
      return false;
  return dim == 3 || p[2] == 0.0;
}

double Box::volume() const
{
  double v = 1.0;
  for (int i = 0; i < dim; ++i)
    v *= upper[i] - lower[i];
  return v;
}

double NodalSamples::interpolate(const Point& x) const
{
  const double hx = (box.upper[0] - box.lower[0]) / nx;
  const double hy = (box.upper[1] - box.lower[1]) / ny;
  const double sx = (x[0] - box.lower[0]) / hx;
  const double sy = (x[1] - box.lower[1]) / hy;
  if (sx < 0.0 || sy < 0.0 || sx > nx || sy > ny)
    return 0.0;
  const int i = std::min(static_cast<int>(sx), nx - 1);
  const int j = std::min(static_cast<int>(sy), ny - 1);
  const double u = sx - i, v = sy - j;
  return (1 - u) * (1 - v) * at(i, j) + u * (1 - v) * at(i + 1, j) + (1 - u) * v * at(i, j + 1)
       + u * v * at(i + 1, j + 1);
}

double NodalSamples::integrate() const
{
  const double cell = (box.upper[0] - box.lower[0]) / nx * (box.upper[1] - box.lower[1]) / ny;
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      sum += 0.25 * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1));
  return sum * cell;
}

bool NodalSamples::same_layout(const NodalSamples& other) const
{
  return nx == other.nx && ny == other.ny && box.lower == other.box.lower && box.upper == other.box.upper;
}

struct Density::Node {
  Kind kind = Kind::Constant;
  int dim = 2;
  double a = 0.0;          // constant value / amplitude / scale factor / affine c0
  double width = 0.0;
  Point vec = Point::Zero(); // affine gradient / gaussian centre
  NodalSamples samples;
  std::function<double(const Point&)> fn;
  std::string label;
  std::vector<Density> children;
};

namespace {

std::shared_ptr<Density::Node> make(Density::Kind kind)
{
  auto n = std::make_shared<Density::Node>();
  n->kind = kind;
  return n;
}

NodalSamples map_samples(const NodalSamples& s, const std::function<double(double)>& f)
{
  NodalSamples out = s;
  for (double& v : out.values)
    v = f(v);
  return out;
}

std::string num(double v)
{
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

Density Density::constant(double value)
{
  auto n = make(Kind::Constant);
  n->a = value;
  return Density(n);
}

Density Density::affine(double c0, const Point& gradient)
{
  auto n = make(Kind::Affine);
  n->a = c0;
  n->vec = gradient;
  n->dim = gradient[2] == 0.0 ? 2 : 3;
  return Density(n);
}

Density Density::sine_product(double amplitude, int dim)
{
  check_dimension(dim);
  auto n = make(Kind::SineProduct);
  n->a = amplitude;
  n->dim = dim;
  return Density(n);
}

Density Density::gaussian(double amplitude, const Point& centre, double width)
{
  if (!(width > 0.0))
    throw std::invalid_argument("gaussian density: width must be positive");
  auto n = make(Kind::Gaussian);
  n->a = amplitude;
  n->vec = centre;
  n->width = width;
  n->dim = centre[2] == 0.0 ? 2 : 3;
  return Density(n);
}

Density Density::nodal(NodalSamples samples)
{
  if (samples.box.dim != 2 || samples.nx < 1 || samples.ny < 1
      || samples.values.size() != static_cast<std::size_t>((samples.nx + 1) * (samples.ny + 1)))
    throw std::invalid_argument("nodal density: inconsistent sample layout");
  for (double v : samples.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("nodal density: non-finite sample");
  auto n = make(Kind::Nodal);
  n->samples = std::move(samples);
  return Density(n);
}

Density Density::function(std::function<double(const Point&)> f, std::string label)
{
  auto n = make(Kind::Function);
  n->fn = std::move(f);
  n->label = std::move(label);
  return Density(n);
}

Density::Kind Density::kind() const { return node_->kind; }

const NodalSamples& Density::samples() const
{
  if (!is_nodal())
    throw std::logic_error("density is not nodal");
  return node_->samples;
}

double Density::operator()(const Point& x) const
{
  const Node& n = *node_;
  switch (n.kind) {
  case Kind::Constant:
    return n.a;
  case Kind::Affine:
    return n.a + n.vec.dot(x);
  case Kind::SineProduct: {
    double v = n.a;
    for (int i = 0; i < n.dim; ++i)
      v *= std::sin(std::numbers::pi * x[i]);
    return v;
  }
  case Kind::Gaussian:
    return n.a * std::exp(-(x - n.vec).squaredNorm() / (2.0 * n.width * n.width));
  case Kind::Nodal:
    return n.samples.interpolate(x);
  case Kind::Function:
    return n.fn(x);
  case Kind::Sum: {
    double v = 0.0;
    for (const Density& c : n.children)
      v += c(x);
    return v;
  }
  case Kind::Scale:
    return n.a * n.children.front()(x);
  case Kind::PositivePart:
    return std::max(n.children.front()(x), 0.0);
  case Kind::NegativePart:
    return std::max(-n.children.front()(x), 0.0);
  }
  return 0.0;
}

Density Density::operator+(const Density& other) const
{
  if (is_nodal() && other.is_nodal() && samples().same_layout(other.samples())) {
    NodalSamples s = samples();
    for (std::size_t i = 0; i < s.values.size(); ++i)
      s.values[i] += other.samples().values[i];
    return nodal(std::move(s));
  }
  auto n = make(Kind::Sum);
  for (const Density* d : {this, &other}) {
    if (d->kind() == Kind::Sum)
      n->children.insert(n->children.end(), d->node_->children.begin(), d->node_->children.end());
    else
      n->children.push_back(*d);
  }
  return Density(n);
}

Density Density::operator*(double factor) const
{
  if (is_nodal())
    return nodal(map_samples(samples(), [factor](double v) { return factor * v; }));
  if (kind() == Kind::Constant)
    return constant(factor * node_->a);
  auto n = make(Kind::Scale);
  n->a = factor;
  n->children.push_back(*this);
  return Density(n);
}

bool Density::is_zero() const
{
  if (kind() == Kind::Constant)
    return node_->a == 0.0;
  if (is_nodal()) {
    const auto& v = samples().values;
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  }
  return false;
}

Density Density::positive_part() const
{
  if (is_nodal())
    return nodal(map_samples(samples(), [](double v) { return std::max(v, 0.0); }));
  if (kind() == Kind::Constant)
    return constant(std::max(node_->a, 0.0));
  auto n = make(Kind::PositivePart);
  n->children.push_back(*this);
  return Density(n);
}

Density Density::negative_part() const
{
  if (is_nodal())
    return nodal(map_samples(samples(), [](double v) { return std::max(-v, 0.0); }));
  if (kind() == Kind::Constant)
    return constant(std::max(-node_->a, 0.0));
  auto n = make(Kind::NegativePart);
  n->children.push_back(*this);
  return Density(n);
}

void for_each_quadrature_point(const Box& box, const CellQuadrature& q,
                               const std::function<void(const Point&, double)>& f)
{
  const int cells = box.dim == 2 ? q.cells_2d : q.cells_3d;
  const GaussRule& rule = gauss_legendre(box.dim == 2 ? q.points_2d : q.points_3d);
  const int np = static_cast<int>(rule.nodes.size());
  Point h = (box.upper - box.lower) / cells;
  if (box.dim == 2)
    h[2] = 0.0;
  const double cell_volume = box.volume() / std::pow(static_cast<double>(cells), box.dim);
  const int cz = box.dim == 3 ? cells : 1;
  const int pz = box.dim == 3 ? np : 1;
  Point x;
  for (int k = 0; k < cz; ++k)
    for (int j = 0; j < cells; ++j)
      for (int i = 0; i < cells; ++i)
        for (int c = 0; c < pz; ++c)
          for (int b = 0; b < np; ++b)
            for (int a = 0; a < np; ++a) {
              x[0] = box.lower[0] + (i + rule.nodes[a]) * h[0];
              x[1] = box.lower[1] + (j + rule.nodes[b]) * h[1];
              x[2] = box.dim == 3 ? box.lower[2] + (k + rule.nodes[c]) * h[2] : 0.0;
              double w = rule.weights[a] * rule.weights[b] * cell_volume;
              if (box.dim == 3)
                w *= rule.weights[c];
              f(x, w);
            }
}

double Density::integrate(const Box& box, const CellQuadrature& q) const
{
  if (is_nodal())
    return samples().integrate();
  if (kind() == Kind::Constant)
    return node_->a * box.volume();
  double sum = 0.0;
  for_each_quadrature_point(box, q, [&](const Point& x, double w) { sum += w * (*this)(x); });
  return sum;
}

double Density::integrate_abs(const Box& box, const CellQuadrature& q) const
{
  if (is_nodal())
    return map_samples(samples(), [](double v) { return std::abs(v); }).integrate();
  if (kind() == Kind::Constant)
    return std::abs(node_->a) * box.volume();
  double sum = 0.0;
  for_each_quadrature_point(box, q, [&](const Point& x, double w) { sum += w * std::abs((*this)(x)); });
  return sum;
}

std::string Density::serialize() const
{
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
  case Kind::Constant:
    os << "const " << num(n.a);
    break;
  case Kind::Affine:
    os << "affine " << num(n.a);
    for (int i = 0; i < 3; ++i)
      os << ' ' << num(n.vec[i]);
    break;
  case Kind::SineProduct:
    os << "sine " << num(n.a);
    break;
  case Kind::Gaussian:
    os << "gauss " << num(n.a);
    for (int i = 0; i < 3; ++i)
      os << ' ' << num(n.vec[i]);
    os << ' ' << num(n.width);
    break;
  case Kind::Nodal: {
    const NodalSamples& s = n.samples;
    os << "nodal " << num(s.box.lower[0]) << ' ' << num(s.box.lower[1]) << ' ' << num(s.box.upper[0]) << ' '
       << num(s.box.upper[1]) << ' ' << s.nx << ' ' << s.ny;
    for (double v : s.values)
      os << ' ' << num(v);
    break;
  }
  case Kind::Function:
    throw std::logic_error("density '" + n.label + "' has no text form");
  case Kind::Sum:
    os << "sum " << n.children.size();
    for (const Density& c : n.children)
      os << ' ' << c.serialize();
    break;
  case Kind::Scale:
    os << "scale " << num(n.a) << ' ' << n.children.front().serialize();
    break;
  case Kind::PositivePart:
    os << "pos " << n.children.front().serialize();
    break;
  case Kind::NegativePart:
    os << "neg " << n.children.front().serialize();
    break;
  }
  return os.str();
}

Density Density::parse(const std::vector<std::string>& tokens, std::size_t& pos, int dim)
{
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size())
      throw std::invalid_argument("density: unexpected end of record");
    return tokens[pos++];
  };
  auto number = [&]() {
    const std::string& t = next();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size())
      throw std::invalid_argument("density: expected a number, got '" + t + "'");
    return v;
  };
  auto integer = [&]() {
    const double v = number();
    if (v != std::floor(v) || v < 0)
      throw std::invalid_argument("density: expected a non-negative integer");
    return static_cast<int>(v);
  };

  const std::string head = next();
  if (head == "const")
    return constant(number());
  if (head == "affine") {
    const double c0 = number();
    Point g;
    for (int i = 0; i < 3; ++i)
      g[i] = number();
    return affine(c0, g);
  }
  if (head == "sine")
    return sine_product(number(), dim);
  if (head == "gauss") {
    const double amp = number();
    Point c;
    for (int i = 0; i < 3; ++i)
      c[i] = number();
    return gaussian(amp, c, number());
  }
  if (head == "nodal") {
    NodalSamples s;
    Point lo = Point::Zero(), hi = Point::Zero();
    lo[0] = number();
    lo[1] = number();
    hi[0] = number();
    hi[1] = number();
    s.box = Box(2, lo, hi);
    s.nx = integer();
    s.ny = integer();
    s.values.resize(static_cast<std::size_t>((s.nx + 1) * (s.ny + 1)));
    for (double& v : s.values)
      v = number();
    return nodal(std::move(s));
  }
  if (head == "sum") {
    const int count = integer();
    if (count < 1)
      throw std::invalid_argument("density: empty sum");
    Density d = parse(tokens, pos, dim);
    for (int i = 1; i < count; ++i)
      d = d + parse(tokens, pos, dim);
    return d;
  }
  if (head == "scale") {
    const double f = number();
    return parse(tokens, pos, dim) * f;
  }
  if (head == "pos")
    return parse(tokens, pos, dim).positive_part();
  if (head == "neg")
    return parse(tokens, pos, dim).negative_part();
  throw std::invalid_argument("density: unknown term '" + head + "'");
}

} // namespace obstlab
