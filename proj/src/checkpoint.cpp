#include "stereomix/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "stereomix/common.hpp"

namespace smx {

namespace {

constexpr char kMagic[8] = {'S', 'M', 'X', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated checkpoint");
    return v;
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
    put<uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_vec(std::istream& in, std::vector<double>& v) {
    const uint64_t n = get<uint64_t>(in);
    if (n != v.size()) throw FormatError("checkpoint tensor size mismatch");
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw FormatError("truncated checkpoint tensor");
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out.write(kMagic, sizeof(kMagic));
        put<uint32_t>(out, 1u);

        put<uint8_t>(out, static_cast<uint8_t>(ck.model.kind));
        put<double>(out, ck.model.d_max);
        put<double>(out, ck.model.width_factor);
        put<int32_t>(out, ck.n_down);
        put<int32_t>(out, ck.base_ch);
        put<int32_t>(out, ck.model.net.out_ch);
        put<int32_t>(out, ck.epochs_done);

        const TrainConfig& c = ck.cfg;
        put<int32_t>(out, c.points_per_crop);
        put<int32_t>(out, c.crop);
        put<int32_t>(out, c.epochs);
        put<double>(out, c.lr);
        put<uint8_t>(out, static_cast<uint8_t>(c.loss));
        put<uint8_t>(out, static_cast<uint8_t>(c.sampling));
        put<int32_t>(out, c.rho);
        put<int32_t>(out, c.sr_factor);
        put<uint8_t>(out, c.gt_at_base ? 1 : 0);
        put<uint8_t>(out, c.augment ? 1 : 0);
        put<int32_t>(out, c.query_batch);
        put<uint64_t>(out, c.seed);

        const auto weights = collect_weights(ck.model.net, ck.model.head);
        put<uint64_t>(out, weights.size());
        for (const auto* w : weights) put_vec(out, *w);

        put<int64_t>(out, ck.adam.step);
        put<uint64_t>(out, ck.adam.m.size());
        for (const auto& m : ck.adam.m) put_vec(out, m);
        for (const auto& v : ck.adam.v) put_vec(out, v);
        if (!out) throw IoError("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not a checkpoint file");
    if (get<uint32_t>(in) != 1u) throw FormatError("unsupported checkpoint version");

    Checkpoint ck;
    const uint8_t kind = get<uint8_t>(in);
    if (kind > 2) throw FormatError("unknown head kind in checkpoint");
    const double d_max = get<double>(in);
    const double width_factor = get<double>(in);
    ck.n_down = get<int32_t>(in);
    ck.base_ch = get<int32_t>(in);
    const int out_ch = get<int32_t>(in);
    ck.epochs_done = get<int32_t>(in);

    TrainConfig& c = ck.cfg;
    c.points_per_crop = get<int32_t>(in);
    c.crop = get<int32_t>(in);
    c.epochs = get<int32_t>(in);
    c.lr = get<double>(in);
    c.loss = static_cast<HeadKind>(get<uint8_t>(in));
    c.sampling = static_cast<SamplingKind>(get<uint8_t>(in));
    c.rho = get<int32_t>(in);
    c.sr_factor = get<int32_t>(in);
    c.gt_at_base = get<uint8_t>(in) != 0;
    c.augment = get<uint8_t>(in) != 0;
    c.query_batch = get<int32_t>(in);
    c.seed = get<uint64_t>(in);

    ck.model = make_model(static_cast<HeadKind>(kind), ck.n_down, ck.base_ch, out_ch,
                          width_factor, d_max, /*seed=*/0);
    const std::vector<ParamRef> params = collect_params(ck.model.net, ck.model.head);
    if (get<uint64_t>(in) != params.size())
        throw FormatError("checkpoint parameter block count mismatch");
    for (const ParamRef& p : params) get_vec(in, *p.w);

    const int64_t adam_step_count = get<int64_t>(in);
    const uint64_t nblocks = get<uint64_t>(in);
    if (nblocks != params.size()) throw FormatError("checkpoint optimizer block mismatch");
    adam_init(ck.adam, params);
    for (auto& m : ck.adam.m) get_vec(in, m);
    for (auto& v : ck.adam.v) get_vec(in, v);
    ck.adam.step = adam_step_count;
    return ck;
}

} // namespace smx
