#include <bit>
#include <filesystem>
#include <fstream>

#include "trauma/errors.hpp"
#include "trauma/json_util.hpp"
#include "trauma/prep.hpp"

namespace trauma::prep {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little);

void save_prep(const std::string& dir, const PrepResult& prep,
               const LabelSchema& schema) {
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / ("prep_" + prep.study_id + ".raw"),
                     std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("save_prep: cannot write raw for " + prep.study_id);
    std::vector<float> buf(static_cast<std::size_t>(prep.sequence.numel()));
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = static_cast<float>(prep.sequence[static_cast<std::int64_t>(i)]);
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  {
    std::ofstream os(fs::path(dir) / ("prepmask_" + prep.study_id + ".raw"),
                     std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("save_prep: cannot write mask for " + prep.study_id);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(prep.mask_sequence.numel()));
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = prep.mask_sequence[static_cast<std::int64_t>(i)] >= 0.5 ? 1 : 0;
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
  }
  json j{{"study_id", prep.study_id},
         {"T", prep.sequence.dim(0)},
         {"height", prep.sequence.dim(2)},
         {"width", prep.sequence.dim(3)},
         {"crop_box",
          {prep.crop_box.z0, prep.crop_box.z1, prep.crop_box.y0, prep.crop_box.y1,
           prep.crop_box.x0, prep.crop_box.x1}},
         {"degenerate_mask", prep.degenerate_mask},
         {"source_indices", prep.source_indices},
         {"centers", prep.centers}};
  json labels = json::object();
  json patient = json::object();
  for (std::size_t g = 0; g < schema.groups.size(); ++g) {
    labels[schema.groups[g].name] = prep.slice_labels[g];
    patient[schema.groups[g].name] = prep.patient_labels[g];
  }
  j["slice_labels"] = labels;
  j["patient_labels"] = patient;
  std::ofstream os(fs::path(dir) / ("prep_" + prep.study_id + ".json"),
                   std::ios::trunc);
  if (!os) throw io_error("save_prep: cannot write json for " + prep.study_id);
  os << j.dump(2) << "\n";
}

PrepResult load_prep(const std::string& dir, const std::string& study_id,
                     const LabelSchema& schema) {
  std::ifstream is(fs::path(dir) / ("prep_" + study_id + ".json"));
  if (!is) throw io_error("load_prep: missing prep json for " + study_id);
  json j;
  is >> j;
  PrepResult out;
  out.study_id = study_id;
  const std::int64_t T = j.at("T").get<std::int64_t>();
  const std::int64_t H = j.at("height").get<std::int64_t>();
  const std::int64_t W = j.at("width").get<std::int64_t>();
  const auto box = j.at("crop_box").get<std::vector<std::int64_t>>();
  if (box.size() != 6) throw io_error("load_prep: malformed crop_box");
  out.crop_box = Box3{box[0], box[1], box[2], box[3], box[4], box[5]};
  out.degenerate_mask = j.at("degenerate_mask").get<bool>();
  out.source_indices = j.at("source_indices").get<std::vector<std::int64_t>>();
  out.centers = j.at("centers").get<std::vector<std::int64_t>>();
  for (const auto& g : schema.groups) {
    out.slice_labels.push_back(
        j.at("slice_labels").at(g.name).get<std::vector<double>>());
    out.patient_labels.push_back(j.at("patient_labels").at(g.name).get<int>());
  }

  out.sequence = nn::Tensor({T, 3, H, W});
  {
    std::ifstream rs(fs::path(dir) / ("prep_" + study_id + ".raw"),
                     std::ios::binary);
    if (!rs) throw io_error("load_prep: missing raw for " + study_id);
    std::vector<float> buf(static_cast<std::size_t>(out.sequence.numel()));
    rs.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (rs.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
      throw io_error("load_prep: short raw read for " + study_id);
    for (std::size_t i = 0; i < buf.size(); ++i)
      out.sequence[static_cast<std::int64_t>(i)] = static_cast<double>(buf[i]);
  }
  out.mask_sequence = nn::Tensor({T, H, W});
  {
    std::ifstream rs(fs::path(dir) / ("prepmask_" + study_id + ".raw"),
                     std::ios::binary);
    if (!rs) throw io_error("load_prep: missing mask raw for " + study_id);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(out.mask_sequence.numel()));
    rs.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (rs.gcount() != static_cast<std::streamsize>(buf.size()))
      throw io_error("load_prep: short mask read for " + study_id);
    for (std::size_t i = 0; i < buf.size(); ++i)
      out.mask_sequence[static_cast<std::int64_t>(i)] = buf[i] ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace trauma::prep
