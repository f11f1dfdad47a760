#include "cdg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace cdg {

ManufacturedProblem example1(double mu, double a) {
  if (!(mu > 0.0) || !(a > 0.0))
    throw ValidationError("example1 requires mu > 0 and a > 0");
  constexpr double tp = 2.0 * std::numbers::pi;
  ManufacturedProblem pr;
  pr.name = "example1";
  pr.mu = mu;
  pr.a = a;
  pr.u = [](const Point& x) {
    return Vec2(std::sin(tp * x.x()) * std::cos(tp * x.y()), -std::cos(tp * x.x()) * std::sin(tp * x.y()));
  };
  pr.grad_u = [](const Point& x) {
    const double sx = std::sin(tp * x.x()), cx = std::cos(tp * x.x());
    const double sy = std::sin(tp * x.y()), cy = std::cos(tp * x.y());
    Mat2 g;
    g << tp * cx * cy, -tp * sx * sy, tp * sx * sy, -tp * cx * cy;
    return g;
  };
  pr.p = [](const Point& x) { return x.x() * x.x() * x.y() * x.y() - 1.0 / 9.0; };
  pr.grad_p = [](const Point& x) {
    return Vec2(2.0 * x.x() * x.y() * x.y(), 2.0 * x.x() * x.x() * x.y());
  };
  auto kinv = [a](const Point& x) { return a * (std::sin(tp * x.x()) + 1.1); };
  pr.kappa_inv = [kinv](const Point& x) -> Mat2 { return kinv(x) * Mat2::Identity(); };
  pr.f = [mu, kinv, u = pr.u, gp = pr.grad_p](const Point& x) -> Vec2 {
    return mu * (2.0 * tp * tp + kinv(x)) * u(x) + gp(x);
  };
  pr.g = pr.u;
  return pr;
}

ManufacturedProblem polynomial_problem(int k, double mu, double kappa_scale) {
  if (k < 1)
    throw ValidationError("polynomial_problem requires k >= 1");
  std::vector<Polynomial2::Term> terms;
  int idx = 0;
  for (int d = 2; d <= k + 1; ++d)
    for (int b = 0; b <= d; ++b, ++idx)
      terms.push_back({d - b, b, (idx % 2 ? -1.0 : 1.0) * (0.4 + 0.15 * idx)});
  const Polynomial2 psi(terms);
  const Polynomial2 u1 = psi.dy();
  const Polynomial2 u2 = -psi.dx();

  Polynomial2 p;
  if (k >= 2) {
    std::vector<Polynomial2::Term> pt;
    idx = 0;
    for (int d = 1; d <= k - 1; ++d)
      for (int b = 0; b <= d; ++b, ++idx)
        pt.push_back({d - b, b, (idx % 3 == 1 ? -0.7 : 0.5) + 0.1 * idx});
    p = Polynomial2(pt);
    p = p - Polynomial2::constant(p.integrate_box(0.0, 1.0, 0.0, 1.0));
  }
  const Polynomial2 px = p.dx(), py = p.dy();
  const Polynomial2 lap1 = u1.dx().dx() + u1.dy().dy();
  const Polynomial2 lap2 = u2.dx().dx() + u2.dy().dy();
  Mat2 kinv;
  kinv << 2.0, 0.5, 0.5, 1.0;
  kinv *= kappa_scale;

  ManufacturedProblem pr;
  pr.name = "polynomial_k" + std::to_string(k);
  pr.mu = mu;
  pr.a = kappa_scale;
  pr.u = [u1, u2](const Point& x) { return Vec2(u1(x), u2(x)); };
  pr.grad_u = [d11 = u1.dx(), d12 = u1.dy(), d21 = u2.dx(), d22 = u2.dy()](const Point& x) {
    Mat2 g;
    g << d11(x), d12(x), d21(x), d22(x);
    return g;
  };
  pr.p = p.field();
  pr.grad_p = [px, py](const Point& x) { return Vec2(px(x), py(x)); };
  pr.kappa_inv = [kinv](const Point&) { return kinv; };
  pr.f = [=](const Point& x) -> Vec2 {
    const Vec2 u(u1(x), u2(x));
    return mu * (-Vec2(lap1(x), lap2(x)) + kinv * u) + Vec2(px(x), py(x));
  };
  pr.g = pr.u;
  return pr;
}

RasterKappa::RasterKappa(int rows, int cols, std::vector<double> values, BoundingBox box)
    : rows_(rows), cols_(cols), values_(std::move(values)), box_(box) {
  if (rows <= 0 || cols <= 0)
    throw ValidationError("raster dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(rows) * cols)
    throw ValidationError("raster has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(static_cast<long>(rows) * cols));
  if (!(box_.area() > 0.0))
    throw ValidationError("raster box has zero area");
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = at(r, c);
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "raster value " << v << " at row " << r << ", col " << c << " (x = "
           << box_.lo.x() + (c + 0.5) * (box_.hi.x() - box_.lo.x()) / cols
           << ", y = " << box_.lo.y() + (r + 0.5) * (box_.hi.y() - box_.lo.y()) / rows << ") is not positive";
        throw ValidationError(os.str());
      }
    }
}

double RasterKappa::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RasterKappa::max() const { return *std::max_element(values_.begin(), values_.end()); }

double RasterKappa::operator()(const Point& x) const {
  const Point rel = (x - box_.lo).cwiseQuotient(box_.hi - box_.lo);
  const int c = std::clamp(static_cast<int>(std::floor(rel.x() * cols_)), 0, cols_ - 1);
  const int r = std::clamp(static_cast<int>(std::floor(rel.y() * rows_)), 0, rows_ - 1);
  return at(r, c);
}

TensorField RasterKappa::tensor_field() const {
  return [self = *this](const Point& x) -> Mat2 { return self(x) * Mat2::Identity(); };
}

namespace {

std::string next_content_line(std::istream& in, int& line_no, std::vector<std::string>* comments = nullptr) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos)
      continue;
    if (line[first] == '#') {
      if (comments)
        comments->push_back(line.substr(first + 1));
      continue;
    }
    return line;
  }
  return {};
}

} // namespace

RasterKappa read_kappa_csv(std::istream& in, const std::string& name) {
  int line_no = 0;
  std::string header = next_content_line(in, line_no);
  std::replace(header.begin(), header.end(), ',', ' ');
  std::istringstream hs(header);
  int rows = 0, cols = 0;
  if (!(hs >> rows >> cols) || rows <= 0 || cols <= 0)
    throw ParseError(name, line_no, "expected 'rows cols' header");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * cols);
  std::string line;
  while (!(line = next_content_line(in, line_no)).empty()) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw ParseError(name, line_no, "invalid number '" + tok + "'");
      values.push_back(v);
    }
  }
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw ParseError(name, line_no,
                     "expected " + std::to_string(rows * cols) + " values, found " + std::to_string(values.size()));
  return RasterKappa(rows, cols, std::move(values));
}

RasterKappa read_kappa_pgm(std::istream& in, const std::string& name) {
  int line_no = 0;
  std::vector<std::string> comments;
  std::vector<long> tokens;
  std::string magic;
  std::string line;
  while (!(line = next_content_line(in, line_no, &comments)).empty()) {
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (magic.empty()) {
        magic = tok;
        if (magic != "P2")
          throw ParseError(name, line_no, "only plain PGM (P2) is supported");
        continue;
      }
      try {
        tokens.push_back(std::stol(tok));
      } catch (const std::exception&) {
        throw ParseError(name, line_no, "invalid integer '" + tok + "'");
      }
    }
  }
  if (tokens.size() < 3)
    throw ParseError(name, line_no, "truncated PGM header");
  const int cols = static_cast<int>(tokens[0]);
  const int rows = static_cast<int>(tokens[1]);
  const long maxval = tokens[2];
  if (cols <= 0 || rows <= 0 || maxval <= 0)
    throw ParseError(name, 1, "invalid PGM dimensions");
  if (tokens.size() != 3 + static_cast<std::size_t>(rows) * cols)
    throw ParseError(name, line_no, "expected " + std::to_string(rows * cols) + " pixels");

  double lo = 0.0, hi = 0.0;
  bool log_map = false, have_map = false;
  for (const std::string& c : comments) {
    std::istringstream cs(c);
    std::string key, mode;
    if (cs >> key && key == "kappa_inv_map" && cs >> lo >> hi) {
      have_map = true;
      if (cs >> mode)
        log_map = mode == "log";
    }
  }
  if (!have_map)
    throw ParseError(name, 1, "missing '# kappa_inv_map LO HI' line");
  if (!(lo > 0.0) || !(hi > 0.0))
    throw ValidationError(name + ": kappa_inv_map bounds must be positive");

  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double t = static_cast<double>(tokens[3 + static_cast<std::size_t>(r) * cols + c]) / maxval;
      const double v = log_map ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
      values[static_cast<std::size_t>(rows - 1 - r) * cols + c] = v;
    }
  return RasterKappa(rows, cols, std::move(values));
}

RasterKappa load_kappa_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open raster '" + path.string() + "'");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".pgm")
    return read_kappa_pgm(in, path.string());
  return read_kappa_csv(in, path.string());
}

void save_kappa_csv(const std::filesystem::path& path, const RasterKappa& raster) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write raster '" + path.string() + "'");
  out << raster.rows() << ' ' << raster.cols() << '\n' << std::setprecision(17);
  for (int r = 0; r < raster.rows(); ++r) {
    for (int c = 0; c < raster.cols(); ++c)
      out << (c ? "," : "") << raster.at(r, c);
    out << '\n';
  }
}

RasterKappa blocky_raster(int n) {
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  const int block = std::max(n / 8, 1);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int level = (r / block * 3 + c / block * 5) % 5;
      v[static_cast<std::size_t>(r) * n + c] = std::pow(10.0, level);
    }
  return RasterKappa(n, n, std::move(v));
}

RasterKappa vuggy_raster(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(0.05, 0.95), rad(0.03, 0.09);
  struct Vug {
    Point c;
    double r;
  };
  std::vector<Vug> vugs;
  for (int i = 0; i < 14; ++i) {
    const double x = pos(rng), y = pos(rng), r = rad(rng);
    vugs.push_back({{x, y}, r});
  }
  std::vector<double> v(static_cast<std::size_t>(n) * n, 1e4);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const Point x((c + 0.5) / n, (r + 0.5) / n);
      for (const Vug& g : vugs) {
        const double d = (x - g.c).norm();
        if (d < g.r)
          v[static_cast<std::size_t>(r) * n + c] = 1.0;
        else if (d < 1.5 * g.r)
          v[static_cast<std::size_t>(r) * n + c] = std::min(v[static_cast<std::size_t>(r) * n + c], 1e2);
      }
    }
  return RasterKappa(n, n, std::move(v));
}

RasterKappa fiber_raster(int n) {
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double x = (c + 0.5) / n, y = (r + 0.5) / n;
      const double phase = std::fmod(6.0 * (x + 0.35 * y) + 0.25 * std::sin(2.0 * std::numbers::pi * 3.0 * y), 1.0);
      v[static_cast<std::size_t>(r) * n + c] = phase < 0.3 ? 1.0 : (phase < 0.4 ? 1e2 : 1e4);
    }
  return RasterKappa(n, n, std::move(v));
}

ProblemSpec cavity_problem(const RasterKappa& kappa, double mu, bool matching_force) {
  if (!(mu > 0.0))
    throw ValidationError("mu must be positive");
  ProblemSpec spec;
  spec.mu = mu;
  spec.kappa_inv = kappa.tensor_field();
  if (matching_force)
    spec.f = [mu, kappa](const Point& x) { return Vec2(mu * kappa(x), 0.0); };
  else
    spec.f = [](const Point&) { return Vec2(0.0, 0.0); };
  spec.g = [](const Point&) { return Vec2(1.0, 0.0); };
  return spec;
}

} // namespace cdg
