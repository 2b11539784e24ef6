#include "loopsoup/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace loopsoup {

namespace {

nlohmann::json cycle_json(const UnrootedLoop& loop) {
  nlohmann::json c = nlohmann::json::array();
  for (const Site& s : loop.cycle()) c.push_back({s.x, s.y});
  return c;
}

void check_format(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || j.value("format", "") != name) throw std::invalid_argument(std::string("not a ") + name + " document");
  if (j.value("version", 0) != kFormatVersion) throw std::invalid_argument("unsupported format version");
}

}  // namespace

nlohmann::json soup_to_json(const LoopSoupRealization& soup, const std::string& domain_spec,
                            const std::string& mass_spec) {
  nlohmann::json loops = nlohmann::json::array();
  for (const SoupLoop& item : soup.loops)
    loops.push_back({{"cycle", cycle_json(item.loop)}, {"mark", item.mark}, {"id", item.id}});
  return {{"format", "loopsoup-soup"}, {"version", kFormatVersion}, {"domain", domain_spec},
          {"mass", mass_spec},         {"lambda", soup.lambda},     {"maxlen", soup.maxlen},
          {"seed", soup.seed},         {"replica", soup.replica},   {"killing", soup.killing.k},
          {"loops", loops}};
}

LoopSoupRealization soup_from_json(const nlohmann::json& j) {
  check_format(j, "loopsoup-soup");
  LoopSoupRealization soup;
  soup.lambda = j.at("lambda").get<double>();
  soup.maxlen = j.at("maxlen").get<int>();
  soup.seed = j.at("seed").get<std::uint64_t>();
  soup.replica = j.at("replica").get<std::uint64_t>();
  soup.killing.k = j.at("killing").get<std::vector<double>>();
  for (const auto& l : j.at("loops")) {
    std::vector<Site> cycle;
    for (const auto& p : l.at("cycle")) cycle.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    soup.loops.push_back({UnrootedLoop::from_cycle(std::move(cycle)), l.at("mark").get<double>(),
                          l.at("id").get<std::uint64_t>()});
  }
  return soup;
}

nlohmann::json loops_to_json(const std::vector<WeightedLoop>& loops) {
  nlohmann::json arr = nlohmann::json::array();
  for (const WeightedLoop& w : loops) arr.push_back({{"cycle", cycle_json(w.loop)}, {"weight", w.weight}});
  return {{"format", "loopsoup-loops"}, {"version", kFormatVersion}, {"loops", arr}};
}

nlohmann::json brownian_soup_to_json(const BrownianSoup& soup, const BrownianSoupConfig& config) {
  nlohmann::json loops = nlohmann::json::array();
  for (const BrownianLoop& l : soup.loops) {
    nlohmann::json path = nlohmann::json::array();
    for (const Point& p : l.path) path.push_back({p.real(), p.imag()});
    loops.push_back({{"root", {l.root.real(), l.root.imag()}},
                     {"duration", l.duration},
                     {"mark", l.mark},
                     {"id", l.id},
                     {"path", path}});
  }
  return {{"format", "loopsoup-brownian"},
          {"version", kFormatVersion},
          {"domain", config.domain.describe()},
          {"lambda", config.lambda},
          {"t0", config.t0},
          {"t_max", std::isfinite(config.t_max) ? nlohmann::json(config.t_max) : nlohmann::json(nullptr)},
          {"h", config.h},
          {"mass", config.mass.describe()},
          {"seed", config.seed},
          {"replica", soup.replica},
          {"proposals", soup.proposals},
          {"loops", loops}};
}

void write_field_csv(std::ostream& out, const LatticeDomain& domain, const OccupationField& field) {
  if (field.size() != domain.size()) throw std::invalid_argument("field does not match the domain");
  out << "x,y,L\n";
  out.precision(17);
  for (std::size_t i = 0; i < domain.size(); ++i)
    out << domain.site(i).x << ',' << domain.site(i).y << ',' << field.L[i] << '\n';
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary field dumps assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated binary field dump");
  return v;
}

}  // namespace

void write_fields_binary(std::ostream& out, const std::vector<OccupationField>& fields) {
  const std::uint64_t sites = fields.empty() ? 0 : fields.front().size();
  out.write("LSF1", 4);
  put<std::uint64_t>(out, fields.size());
  put<std::uint64_t>(out, sites);
  for (const auto& f : fields) {
    if (f.size() != sites) throw std::invalid_argument("fields differ in size");
    for (double v : f.L) put<double>(out, v);
  }
}

std::vector<OccupationField> read_fields_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LSF1", 4) != 0) throw std::runtime_error("not a binary field dump");
  const auto replicas = get<std::uint64_t>(in);
  const auto sites = get<std::uint64_t>(in);
  std::vector<OccupationField> fields(replicas);
  for (auto& f : fields) {
    f.L.resize(sites);
    for (auto& v : f.L) v = get<double>(in);
  }
  return fields;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace loopsoup
