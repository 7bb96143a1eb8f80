#include "stereomix/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stereomix/common.hpp"

namespace smx {

namespace {

void write_text_atomic(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << body;
        if (!out) throw IoError("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

std::string report_text(const ErrorReport& r) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << "see3_avg = " << r.see3.avg() << "\n"
        << "see3_sigma1 = " << r.see3.sigma(1) << "\n"
        << "see3_sigma2 = " << r.see3.sigma(2) << "\n"
        << "see5_avg = " << r.see5.avg() << "\n"
        << "see5_sigma1 = " << r.see5.sigma(1) << "\n"
        << "see5_sigma2 = " << r.see5.sigma(2) << "\n"
        << "epe_avg = " << r.epe.avg() << "\n"
        << "epe_sigma1 = " << r.epe.sigma(1) << "\n"
        << "epe_sigma2 = " << r.epe.sigma(2) << "\n"
        << "epe_sigma3 = " << r.epe.sigma(3) << "\n"
        << "boundary_pixels = " << r.boundary_pixels() << "\n"
        << "total_pixels = " << r.total_pixels() << "\n";
    return out.str();
}

void write_report_text(const std::string& path, const ErrorReport& r) {
    write_text_atomic(path, report_text(r));
}

void write_report_json(const std::string& path, const ErrorReport& r) {
    nlohmann::json j;
    j["see3"] = {{"avg", r.see3.avg()},
                 {"sigma1", r.see3.sigma(1)},
                 {"sigma2", r.see3.sigma(2)},
                 {"pixels", r.see3.count}};
    j["see5"] = {{"avg", r.see5.avg()},
                 {"sigma1", r.see5.sigma(1)},
                 {"sigma2", r.see5.sigma(2)},
                 {"pixels", r.see5.count}};
    j["epe"] = {{"avg", r.epe.avg()},
                {"sigma1", r.epe.sigma(1)},
                {"sigma2", r.epe.sigma(2)},
                {"sigma3", r.epe.sigma(3)},
                {"pixels", r.epe.count}};
    write_text_atomic(path, j.dump(2) + "\n");
}

} // namespace smx
