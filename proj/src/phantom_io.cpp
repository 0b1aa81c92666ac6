#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "trauma/errors.hpp"
#include "trauma/json_util.hpp"
#include "trauma/phantom.hpp"
#include "trauma/rng.hpp"

namespace trauma::phantom {

namespace fs = std::filesystem;

// On-disk floats are little-endian by contract; raw memcpy I/O below relies
// on a little-endian host.
static_assert(std::endian::native == std::endian::little);

namespace {

void write_f32_volume(const fs::path& path, const Volume& v) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot open " + path.string());
  std::vector<float> buf(static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<float>(v.data[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!os) throw io_error("write failed for " + path.string());
}

Volume read_f32_volume(const fs::path& path, std::int64_t d, std::int64_t h,
                       std::int64_t w) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open " + path.string());
  Volume v(d, h, w);
  std::vector<float> buf(static_cast<std::size_t>(v.size()));
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (is.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
    throw io_error("short read on " + path.string());
  for (std::size_t i = 0; i < buf.size(); ++i)
    v.data[i] = static_cast<double>(buf[i]);
  return v;
}

void write_mask(const fs::path& path, const MaskVolume& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size()));
  if (!os) throw io_error("write failed for " + path.string());
}

MaskVolume read_mask(const fs::path& path, std::int64_t d, std::int64_t h,
                     std::int64_t w) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open " + path.string());
  MaskVolume m(d, h, w);
  is.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size()));
  if (is.gcount() != static_cast<std::streamsize>(m.data.size()))
    throw io_error("short read on " + path.string());
  return m;
}

json config_to_json(const PhantomConfig& c) {
  return json{{"depth", c.depth},
              {"height", c.height},
              {"width", c.width},
              {"organ_count", c.organ_count},
              {"injury_probability", c.injury_probability},
              {"noise_sigma", c.noise_sigma},
              {"lesion_contrast", c.lesion_contrast}};
}

PhantomConfig config_from_json(const json& j) {
  check_keys(j,
             {"depth", "height", "width", "organ_count", "injury_probability",
              "noise_sigma", "lesion_contrast"},
             "phantom config");
  PhantomConfig c;
  c.depth = j.value("depth", c.depth);
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.organ_count = j.value("organ_count", c.organ_count);
  c.injury_probability = j.value("injury_probability", c.injury_probability);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.lesion_contrast = j.value("lesion_contrast", c.lesion_contrast);
  return c;
}

}  // namespace

void save_study(const std::string& dir, const PhantomStudy& study,
                const LabelSchema& schema) {
  fs::create_directories(dir);
  write_f32_volume(fs::path(dir) / "volume.raw", study.volume);
  json labels = json::object();
  for (std::size_t g = 0; g < schema.groups.size(); ++g) {
    const auto& name = schema.groups[g].name;
    write_mask(fs::path(dir) / ("mask_" + name + ".raw"), study.organ_masks[g]);
    labels[name] = study.patient_labels[g];
  }
  std::ofstream os(fs::path(dir) / "labels.json", std::ios::trunc);
  if (!os) throw io_error("cannot write labels.json under " + dir);
  os << labels.dump(2) << "\n";
}

DatasetManifest generate_dataset(std::uint64_t root_seed, int count,
                                 const PhantomConfig& config,
                                 const LabelSchema& schema,
                                 const std::string& out_path) {
  if (count < 1) throw contract_error("generate_dataset: count must be >= 1");
  config.validate(schema);
  std::error_code ec;
  fs::create_directories(out_path, ec);
  if (ec) throw io_error("generate_dataset: cannot create " + out_path);

  DatasetManifest m;
  m.root_seed = root_seed;
  m.count = count;
  m.config = config;
  m.schema = schema;
  m.studies.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "study_%04d", i);
    m.studies[static_cast<std::size_t>(i)] = {
        name, derive_seed(root_seed, static_cast<std::uint64_t>(i)), name};
  }

  // Studies are independent (seed derived from index), so the order in which
  // they are materialized does not matter.
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    const auto& e = m.studies[static_cast<std::size_t>(i)];
    PhantomStudy s = generate_study(e.seed, config, schema);
    s.study_id = e.id;
    save_study((fs::path(out_path) / e.dir).string(), s, schema);
  }

  json j{{"format", "phantom-dataset-v1"},
         {"root_seed", root_seed},
         {"count", count},
         {"volume_shape", {config.depth, config.height, config.width}},
         {"config", config_to_json(config)},
         {"schema", schema_to_json(schema)}};
  json studies = json::array();
  for (const auto& e : m.studies)
    studies.push_back({{"id", e.id}, {"seed", e.seed}, {"dir", e.dir}});
  j["studies"] = studies;
  std::ofstream os(fs::path(out_path) / "manifest.json", std::ios::trunc);
  if (!os) throw io_error("generate_dataset: cannot write manifest.json");
  os << j.dump(2) << "\n";
  return m;
}

DatasetManifest load_manifest(const std::string& root) {
  std::ifstream is(fs::path(root) / "manifest.json");
  if (!is) throw io_error("load_manifest: no manifest.json under " + root);
  json j;
  is >> j;
  DatasetManifest m;
  m.root_seed = j.at("root_seed").get<std::uint64_t>();
  m.count = j.at("count").get<int>();
  m.config = config_from_json(j.at("config"));
  m.schema = schema_from_json(j.at("schema"));
  for (const auto& sj : j.at("studies"))
    m.studies.push_back({sj.at("id").get<std::string>(),
                         sj.at("seed").get<std::uint64_t>(),
                         sj.at("dir").get<std::string>()});
  if (static_cast<int>(m.studies.size()) != m.count)
    throw io_error("load_manifest: study list does not match count");
  return m;
}

PhantomStudy load_study(const DatasetManifest& manifest, const std::string& root,
                        int index) {
  if (index < 0 || index >= manifest.count)
    throw contract_error("load_study: index out of range");
  const auto& e = manifest.studies[static_cast<std::size_t>(index)];
  const fs::path dir = fs::path(root) / e.dir;
  PhantomStudy s;
  s.study_id = e.id;
  s.seed = e.seed;
  s.volume = read_f32_volume(dir / "volume.raw", manifest.config.depth,
                             manifest.config.height, manifest.config.width);
  std::ifstream is(dir / "labels.json");
  if (!is) throw io_error("load_study: missing labels.json in " + dir.string());
  json labels;
  is >> labels;
  for (const auto& g : manifest.schema.groups) {
    s.organ_masks.push_back(read_mask(dir / ("mask_" + g.name + ".raw"),
                                      manifest.config.depth,
                                      manifest.config.height,
                                      manifest.config.width));
    if (!labels.contains(g.name))
      throw io_error("load_study: labels.json missing group " + g.name);
    s.patient_labels.push_back(labels.at(g.name).get<int>());
  }
  return s;
}

}  // namespace trauma::phantom
