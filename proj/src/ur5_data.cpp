#include <map>
#include <sstream>

#include "riemspline/models.hpp"
#include "text_util.hpp"

namespace riemspline {

namespace {

// Mirror of data/ur5.params; the file ships for external tooling, this copy
// keeps the library self-contained.
constexpr const char* kUr5Params = R"(links = 6
gravity = 9.81

[link 1]
a = 0.0
d = 0.089159
alpha = 1.570796326794896619
mass = 3.7
com = [0.0, -0.02561, 0.00193]
inertia = [0.00245104, 0.00245104, 0.00666]

[link 2]
a = -0.425
d = 0.0
alpha = 0.0
mass = 8.393
com = [-0.2125, 0.0, 0.11336]
inertia = [0.0151074, 0.126332, 0.126332]

[link 3]
a = -0.39225
d = 0.0
alpha = 0.0
mass = 2.275
com = [-0.196125, 0.0, 0.0265]
inertia = [0.004095, 0.0291693, 0.0291693]

[link 4]
a = 0.0
d = 0.10915
alpha = 1.570796326794896619
mass = 1.219
com = [0.0, -0.0018, 0.01634]
inertia = [0.00121024, 0.00121024, 0.0021942]

[link 5]
a = 0.0
d = 0.09465
alpha = -1.570796326794896619
mass = 1.219
com = [0.0, 0.0018, 0.01634]
inertia = [0.000910047, 0.000910047, 0.0021942]

[link 6]
a = 0.0
d = 0.0823
alpha = 0.0
mass = 0.1879
com = [0.0, 0.0, -0.001159]
inertia = [0.000106058, 0.000106058, 0.00033822]
)";

Vec3 to_vec3(const Vec& v, int line) {
  if (v.size() != 3) throw ParseError("expected 3 components", line);
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

const char* ur5_params_text() { return kUr5Params; }

Ur5Params parse_ur5_params(const std::string& text) {
  Ur5Params params;
  int declared_links = -1;
  int current = -1;  // 0-based link index of the open section
  std::map<int, std::map<std::string, std::pair<std::string, int>>> sections;
  std::map<std::string, std::pair<std::string, int>> globals;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string key, value;
    if (!text::parse_kv(raw, key, value)) continue;
    if (key.size() >= 2 && key.front() == '[' && key.back() == ']') {
      std::string name = text::trim(key.substr(1, key.size() - 2));
      if (name.rfind("link", 0) != 0)
        throw ParseError("unknown section '" + name + "'", lineno);
      current = static_cast<int>(text::parse_double(text::trim(name.substr(4)), lineno)) - 1;
      if (current < 0) throw ParseError("bad link index in '" + name + "'", lineno);
      continue;
    }
    if (current < 0)
      globals[key] = {value, lineno};
    else
      sections[current][key] = {value, lineno};
  }

  auto global = [&](const std::string& key) {
    auto it = globals.find(key);
    if (it == globals.end()) throw ParseError("missing entry '" + key + "'");
    return it->second;
  };
  declared_links = static_cast<int>(text::parse_double(global("links").first, global("links").second));
  params.gravity_accel = text::parse_double(global("gravity").first, global("gravity").second);

  for (int k = 0; k < declared_links; ++k) {
    auto sec = sections.find(k);
    if (sec == sections.end())
      throw ParseError("missing section [link " + std::to_string(k + 1) + "]");
    auto entry = [&](const std::string& key) {
      auto it = sec->second.find(key);
      if (it == sec->second.end())
        throw ParseError("link " + std::to_string(k + 1) + ": missing entry '" + key + "'");
      return it->second;
    };
    Ur5LinkRecord rec;
    rec.a = text::parse_double(entry("a").first, entry("a").second);
    rec.d = text::parse_double(entry("d").first, entry("d").second);
    rec.alpha = text::parse_double(entry("alpha").first, entry("alpha").second);
    rec.mass = text::parse_double(entry("mass").first, entry("mass").second);
    rec.com = to_vec3(text::parse_vector_expr(entry("com").first, entry("com").second),
                      entry("com").second);
    rec.inertia_diag =
        to_vec3(text::parse_vector_expr(entry("inertia").first, entry("inertia").second),
                entry("inertia").second);
    params.links.push_back(rec);
  }
  return params;
}

KinematicChain ur5_chain(const Ur5Params& params) {
  KinematicChain chain;
  for (const auto& rec : params.links) {
    Joint j;
    j.post = Eigen::Isometry3d::Identity();
    j.post.translate(Vec3(0, 0, rec.d));
    j.post.translate(Vec3(rec.a, 0, 0));
    j.post.rotate(Eigen::AngleAxisd(rec.alpha, Vec3::UnitX()));
    chain.joints.push_back(j);
    LinkBody body{rec.mass, rec.com, Mat3(rec.inertia_diag.asDiagonal())};
    chain.links.push_back(body);
    chain.link_lengths.push_back(std::max({std::abs(rec.a), std::abs(rec.d), 1e-3}));
  }
  chain.end_offset = Vec3::Zero();
  chain.gravity_accel = params.gravity_accel;
  chain.gravity_dir = -Vec3::UnitZ();
  chain.planar = false;
  chain.validate();
  return chain;
}

}  // namespace riemspline
