#include "convfold/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace convfold {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  f << data;
  if (!f) throw Error(ErrorKind::InvalidConfig, "write failed for '" + path + "'");
}

}  // namespace

Svg::Svg(Vec2 lo, Vec2 hi, double width_px) : lo_(lo), hi_(hi), width_(width_px) {
  const Vec2 ext = (hi - lo).cwiseMax(Vec2::Constant(1e-12));
  scale_ = width_px / ext.x();
  height_ = ext.y() * scale_;
}

Vec2 Svg::map(const Vec2& x) const { return Vec2((x.x() - lo_.x()) * scale_, (hi_.y() - x.y()) * scale_); }

void Svg::polygon(const ConvexPolygon& k, const std::string& stroke, const std::string& fill, double fill_opacity) {
  if (k.empty()) return;
  std::string pts;
  for (const auto& v : k.vertices()) {
    const Vec2 q = map(v);
    pts += fmt(q.x()) + "," + fmt(q.y()) + " ";
  }
  items_.push_back("<polygon points=\"" + pts + "\" stroke=\"" + stroke + "\" fill=\"" + fill +
                   "\" fill-opacity=\"" + fmt(fill_opacity) + "\" stroke-width=\"1.5\"/>");
}

void Svg::polyline(const std::vector<Vec2>& pts, const std::string& stroke, bool closed) {
  if (pts.size() < 2) return;
  std::string s;
  for (const auto& v : pts) {
    const Vec2 q = map(v);
    s += fmt(q.x()) + "," + fmt(q.y()) + " ";
  }
  items_.push_back(std::string(closed ? "<polygon" : "<polyline") + " points=\"" + s + "\" stroke=\"" + stroke +
                   "\" fill=\"none\" stroke-width=\"1\"/>");
}

void Svg::line(const Vec2& omega, double lambda, const std::string& stroke, bool dashed) {
  // Clip the line against the canvas rectangle.
  const Vec2 base = lambda * omega, dir(-omega.y(), omega.x());
  double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (base[a] < lo_[a] || base[a] > hi_[a]) return;
      continue;
    }
    double s0 = (lo_[a] - base[a]) / dir[a], s1 = (hi_[a] - base[a]) / dir[a];
    if (s0 > s1) std::swap(s0, s1);
    t0 = std::max(t0, s0);
    t1 = std::min(t1, s1);
  }
  if (!(t0 < t1)) return;
  const Vec2 a = map(base + t0 * dir), b = map(base + t1 * dir);
  items_.push_back("<line x1=\"" + fmt(a.x()) + "\" y1=\"" + fmt(a.y()) + "\" x2=\"" + fmt(b.x()) + "\" y2=\"" +
                   fmt(b.y()) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"" +
                   (dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>");
}

void Svg::point(const Vec2& x, const std::string& fill, double radius_px) {
  const Vec2 q = map(x);
  items_.push_back("<circle cx=\"" + fmt(q.x()) + "\" cy=\"" + fmt(q.y()) + "\" r=\"" + fmt(radius_px) +
                   "\" fill=\"" + fill + "\"/>");
}

void Svg::text(const Vec2& x, const std::string& s) {
  const Vec2 q = map(x);
  items_.push_back("<text x=\"" + fmt(q.x()) + "\" y=\"" + fmt(q.y()) +
                   "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(s) + "</text>");
}

std::string Svg::str() const {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_) << "\" height=\"" << fmt(height_)
    << "\" viewBox=\"0 0 " << fmt(width_) << " " << fmt(height_) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& it : items_) o << it << "\n";
  o << "</svg>\n";
  return o.str();
}

void Svg::save(const std::string& path) const { write_file(path, str()); }

std::pair<Vec2, Vec2> padded_box(const ConvexPolygon& k, double margin) {
  Vec2 lo = k.vertices().front(), hi = lo;
  for (const auto& v : k.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double pad = margin * std::max(hi.x() - lo.x(), hi.y() - lo.y());
  return {lo - Vec2::Constant(pad), hi + Vec2::Constant(pad)};
}

void write_field_csv(const ScalarField& u, const std::string& path) {
  std::ostringstream o;
  o << "x,y,u\n";
  char buf[96];
  const auto& pts = u.mesh().points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pts[i].x(), pts[i].y(), u.values()[i]);
    o << buf;
  }
  write_file(path, o.str());
}

GridDump resample(const ScalarField& u, std::uint32_t nx, std::uint32_t ny) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidConfig, "grid needs at least 2 x 2 samples");
  const auto& pts = u.mesh().points();
  Vec2 lo = pts.front(), hi = lo;
  for (const auto& v : pts) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  GridDump g;
  g.nx = nx;
  g.ny = ny;
  g.x0 = lo.x();
  g.y0 = lo.y();
  g.dx = (hi.x() - lo.x()) / (nx - 1);
  g.dy = (hi.y() - lo.y()) / (ny - 1);
  g.values.resize(static_cast<std::size_t>(nx) * ny);
  for (std::uint32_t j = 0; j < ny; ++j) {
    for (std::uint32_t i = 0; i < nx; ++i) {
      const auto v = u.value(Vec2(g.x0 + i * g.dx, g.y0 + j * g.dy));
      g.values[static_cast<std::size_t>(j) * nx + i] = v ? *v : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return g;
}

namespace {

template <class T>
void put(std::string& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>(b[sizeof(T) - 1 - i]));
  } else {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::InvalidConfig, "grid file is truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr char kMagic[8] = {'P', 'L', 'A', 'P', 'G', 'R', 'I', 'D'};

}  // namespace

void write_grid_binary(const GridDump& g, const std::string& path) {
  std::string out(kMagic, 8);
  put<std::uint32_t>(out, 1);
  put(out, g.nx);
  put(out, g.ny);
  for (double v : {g.x0, g.y0, g.dx, g.dy}) put(out, v);
  for (double v : g.values) put(out, v);
  write_file(path, out);
}

GridDump read_grid_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot read '" + path + "'");
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 8 || std::memcmp(in.data(), kMagic, 8) != 0) {
    throw Error(ErrorKind::InvalidConfig, "not a PLAPGRID file");
  }
  std::size_t pos = 8;
  if (get<std::uint32_t>(in, pos) != 1) throw Error(ErrorKind::InvalidConfig, "unsupported grid version");
  GridDump g;
  g.nx = get<std::uint32_t>(in, pos);
  g.ny = get<std::uint32_t>(in, pos);
  g.x0 = get<double>(in, pos);
  g.y0 = get<double>(in, pos);
  g.dx = get<double>(in, pos);
  g.dy = get<double>(in, pos);
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  if (in.size() != pos + n * sizeof(double)) throw Error(ErrorKind::InvalidConfig, "grid file size mismatch");
  g.values.resize(n);
  for (auto& v : g.values) v = get<double>(in, pos);
  return g;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string scalar(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (v.empty() || v.find_first_of("\"[]=") != std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": malformed value '" + v + "'");
  }
  return v;
}

// Strips a comment that is not inside quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

}  // namespace

ConfigEntries parse_config(const std::string& text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": expected key = value");
    }
    std::string key = trim(s.substr(0, eq));
    for (char& c : key) {
      if (c == '-') c = '_';
    }
    if (key.empty() || key.find_first_of(" \t\"") != std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": bad key");
    }
    if (out.count(key)) throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": duplicate key " + key);
    const std::string value = trim(s.substr(eq + 1));
    std::vector<std::string> items;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line) + ": unclosed list");
      const std::string body = trim(value.substr(1, value.size() - 2));
      if (!body.empty()) {
        std::string cur;
        bool quoted = false;
        for (char c : body) {
          if (c == '"') quoted = !quoted;
          if (c == ',' && !quoted) {
            items.push_back(scalar(cur, line));
            cur.clear();
          } else {
            cur += c;
          }
        }
        items.push_back(scalar(cur, line));
      }
    } else {
      items.push_back(scalar(value, line));
    }
    out[key] = std::move(items);
  }
  return out;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace convfold
