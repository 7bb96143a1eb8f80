#include "stereomix/dataset_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stereomix/common.hpp"
#include "stereomix/image_io.hpp"
#include "stereomix/pfm.hpp"

namespace fs = std::filesystem;

namespace smx {

namespace {

std::string find_value(const std::vector<std::pair<std::string, std::string>>& kv,
                       const std::string& key, const std::string& path) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    throw FormatError("missing key '" + key + "' in " + path);
}

void write_text_atomic(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << body;
        if (!out) throw IoError("short write to '" + tmp + "'");
    }
    fs::rename(tmp, path);
}

} // namespace

std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("malformed line '" + line + "' in " + path);
        auto trim = [](std::string s) {
            const size_t b = s.find_first_not_of(" \t");
            const size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

void write_sample(const std::string& dir, const StereoSample& sample) {
    fs::create_directories(dir);
    png_write_rgb8(dir + "/left.png", sample.left);
    png_write_rgb8(dir + "/right.png", sample.right);

    // gt.pfm stores raw pixel disparity so external tools need no model context.
    FloatImage gt(sample.gt.width, sample.gt.height);
    for (size_t i = 0; i < sample.gt.d.size(); ++i)
        gt.data[i] = static_cast<float>(sample.gt.d[i] * sample.d_max);
    const std::string tmp = dir + "/gt.pfm.tmp";
    pfm_write(tmp, gt);
    fs::rename(tmp, dir + "/gt.pfm");

    std::ostringstream meta;
    meta << "d_max = " << sample.d_max << "\n"
         << "sr_factor = " << sample.sr_factor << "\n"
         << "seed = " << sample.seed << "\n"
         << "base_width = " << sample.left.width << "\n"
         << "base_height = " << sample.left.height << "\n";
    write_text_atomic(dir + "/meta.txt", meta.str());
}

StereoSample load_sample(const std::string& dir) {
    StereoSample s;
    const auto kv = read_kv_file(dir + "/meta.txt");
    s.d_max = std::stod(find_value(kv, "d_max", dir));
    s.sr_factor = std::stoi(find_value(kv, "sr_factor", dir));
    s.seed = std::stoull(find_value(kv, "seed", dir));
    s.left = png_read_rgb8(dir + "/left.png");
    s.right = png_read_rgb8(dir + "/right.png");

    const FloatImage gt = pfm_read(dir + "/gt.pfm");
    if (gt.width != s.left.width * s.sr_factor || gt.height != s.left.height * s.sr_factor)
        throw FormatError("gt resolution disagrees with meta in " + dir);
    s.gt = DisparityField(gt.width, gt.height);
    for (size_t i = 0; i < s.gt.d.size(); ++i)
        s.gt.d[i] = static_cast<double>(gt.data[i]) / s.d_max;
    return s;
}

void write_dataset(const std::string& root, const Dataset& ds, const SceneConfig& tmpl,
                   uint64_t master_seed) {
    fs::create_directories(root);
    const std::pair<const char*, const std::vector<StereoSample>*> splits[] = {
        {"train", &ds.train}, {"val", &ds.val}, {"test", &ds.test}, {"ood", &ds.ood}};

    std::ostringstream manifest;
    manifest << "master_seed = " << master_seed << "\n"
             << "base_width = " << tmpl.base_width << "\n"
             << "base_height = " << tmpl.base_height << "\n"
             << "sr_factor = " << tmpl.sr_factor << "\n"
             << "d_max = " << tmpl.d_max << "\n"
             << "layers = " << tmpl.layers << "\n";
    for (const auto& [name, samples] : splits)
        manifest << "count_" << name << " = " << samples->size() << "\n";

    for (const auto& [name, samples] : splits) {
        for (size_t i = 0; i < samples->size(); ++i) {
            char idx[8];
            std::snprintf(idx, sizeof(idx), "%03zu", i);
            const std::string dir = root + "/" + name + "/" + idx;
            write_sample(dir, (*samples)[i]);
            manifest << "sample_" << name << "_" << idx << " = " << (*samples)[i].seed
                     << "\n";
        }
    }
    write_text_atomic(root + "/manifest.txt", manifest.str());
}

std::vector<std::string> list_split(const std::string& root, const std::string& split) {
    const auto kv = read_kv_file(root + "/manifest.txt");
    const int count = std::stoi(find_value(kv, "count_" + split, root));
    std::vector<std::string> dirs;
    dirs.reserve(count);
    for (int i = 0; i < count; ++i) {
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%03d", i);
        dirs.push_back(root + "/" + split + "/" + idx);
    }
    return dirs;
}

std::vector<StereoSample> load_split(const std::string& root, const std::string& split) {
    std::vector<StereoSample> out;
    for (const std::string& dir : list_split(root, split)) out.push_back(load_sample(dir));
    if (out.empty()) throw ConfigError("split '" + split + "' is empty in " + root);
    return out;
}

} // namespace smx
