#include "aagan/data.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "aagan/errors.hpp"
#include "aagan/rng.hpp"

namespace aagan {

namespace {

// Snaps to the 2^-12 grid. Grid values of moderate magnitude are exactly
// representable as 32-bit floats, and sums and differences of grid values
// stay on the grid, so container round trips and the zero-noise
// first-difference identity are both exact.
double snap(double x) { return std::round(x * 4096.0) / 4096.0; }

std::vector<double> random_unit(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    double norm = 0.0;
    for (double& x : v) {
        x = rng.gaussian();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

// Orthogonal class dynamics via Gram-Schmidt on a Gaussian matrix, columns
// sign-fixed so the draw is a deterministic function of the stream.
Tensor random_rotation(Rng& rng, std::size_t d) {
    Tensor q({d, d});
    for (std::size_t col = 0; col < d; ++col) {
        std::vector<double> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = rng.gaussian();
        for (std::size_t prev = 0; prev < col; ++prev) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += v[i] * q.at(i, prev);
            for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q.at(i, prev);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-10) {
            // Practically unreachable for Gaussian draws; fall back to a
            // coordinate axis to keep the matrix orthogonal.
            std::fill(v.begin(), v.end(), 0.0);
            v[col] = 1.0;
            norm = 1.0;
        }
        const double sign = v[0] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i) q.at(i, col) = sign * v[i] / norm;
    }
    return q;
}

std::vector<double> mat_vec(const Tensor& m, const std::vector<double>& v) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m.at(i, j) * v[j];
    return out;
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32(out, bits);
}

// Little-endian cursor over a loaded byte buffer; throws on any read past
// the end so truncation surfaces as one uniform error.
struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    std::string context;

    void need(std::size_t n) const {
        if (pos + n > buf.size())
            throw IoError("dataset container: truncated payload" +
                          (context.empty() ? "" : " in record " + context));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f32() {
        const std::uint32_t bits = u32();
        float f;
        std::memcpy(&f, &bits, 4);
        return static_cast<double>(f);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

constexpr char kMagic[4] = {'A', 'A', 'G', 'N'};
constexpr std::uint32_t kVersion = 1;

void validate_manifest(const DatasetManifest& m) {
    for (const FeatureSequenceRecord& r : m.records) {
        if (r.visual.rank() != 2 || r.visual.cols() != m.feature_dim)
            throw IoError("dataset container: record " + r.id + " visual stream " +
                          r.visual.shape_str() + " does not match feature dim " +
                          std::to_string(m.feature_dim));
        if (!r.visual.same_shape(r.temporal))
            throw IoError("dataset container: record " + r.id + " stream shapes disagree: " +
                          r.visual.shape_str() + " vs " + r.temporal.shape_str());
        if (r.label >= m.num_classes)
            throw IoError("dataset container: record " + r.id + " label " +
                          std::to_string(r.label) + " out of range for K=" +
                          std::to_string(m.num_classes));
    }
    for (std::size_t i : m.train_indices)
        if (i >= m.records.size())
            throw IoError("dataset container: train index " + std::to_string(i) +
                          " out of range");
    for (std::size_t i : m.test_indices)
        if (i >= m.records.size())
            throw IoError("dataset container: test index " + std::to_string(i) +
                          " out of range");
}

} // namespace

DatasetManifest generate_synthetic_dataset(const GeneratorConfig& config) {
    if (config.classes < 2)
        throw ConfigError("synthetic dataset: needs at least 2 classes, got " +
                          std::to_string(config.classes));
    if (config.feature_dim < 2)
        throw ConfigError("synthetic dataset: needs feature dim >= 2, got " +
                          std::to_string(config.feature_dim));
    if (config.total_len < 8)
        throw ConfigError("synthetic dataset: needs at least 8 frames, got " +
                          std::to_string(config.total_len));
    if (config.samples_per_class < 1)
        throw ConfigError("synthetic dataset: needs at least 1 sample per class");
    if (config.noise < 0.0) throw ConfigError("synthetic dataset: negative noise level");
    if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0))
        throw ConfigError("synthetic dataset: train fraction must lie in (0,1)");

    DatasetManifest manifest;
    manifest.num_classes = config.classes;
    manifest.feature_dim = config.feature_dim;
    manifest.has_generator = true;
    manifest.generator = config;

    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(config.train_fraction * static_cast<double>(config.samples_per_class)));

    for (std::size_t k = 0; k < config.classes; ++k) {
        Rng class_rng(mix_seed(config.seed, 0xC1A550000ULL + k));
        const Tensor dynamics = random_rotation(class_rng, config.feature_dim);
        const std::vector<double> anchor = random_unit(class_rng, config.feature_dim);

        for (std::size_t s = 0; s < config.samples_per_class; ++s) {
            Rng rng(mix_seed(config.seed, (k + 1) * 0x9E3779B9ULL + s));
            std::vector<double> z(config.feature_dim);
            for (std::size_t j = 0; j < config.feature_dim; ++j)
                z[j] = anchor[j] + 0.2 * rng.gaussian();

            // One extra trajectory point feeds the last first-difference row.
            std::vector<std::vector<double>> snapped;
            snapped.reserve(config.total_len + 1);
            for (std::size_t t = 0; t <= config.total_len; ++t) {
                std::vector<double> q(config.feature_dim);
                for (std::size_t j = 0; j < config.feature_dim; ++j) q[j] = snap(z[j]);
                snapped.push_back(std::move(q));
                z = mat_vec(dynamics, z);
            }

            FeatureSequenceRecord record;
            record.label = k;
            record.id = "c" + std::to_string(k) + "_s" + std::to_string(s);
            record.visual = Tensor({config.total_len, config.feature_dim});
            record.temporal = Tensor({config.total_len, config.feature_dim});
            for (std::size_t t = 0; t < config.total_len; ++t)
                for (std::size_t j = 0; j < config.feature_dim; ++j) {
                    record.visual.at(t, j) =
                        snapped[t][j] + snap(config.noise * rng.gaussian());
                    record.temporal.at(t, j) = (snapped[t + 1][j] - snapped[t][j]) +
                                               snap(config.noise * rng.gaussian());
                }

            const std::size_t index = manifest.records.size();
            if (s < n_train)
                manifest.train_indices.push_back(index);
            else
                manifest.test_indices.push_back(index);
            manifest.records.push_back(std::move(record));
        }
    }
    return manifest;
}

FeatureSequenceRecord resample_sequence(const FeatureSequenceRecord& record,
                                        std::size_t target_len) {
    if (target_len < 2)
        throw ConfigError("resample: target length must be at least 2, got " +
                          std::to_string(target_len));
    const std::size_t src_len = record.visual.rows();
    if (src_len == 0 || record.visual.empty())
        throw ShapeError("resample: record " + record.id + " has no rows");
    require_same_shape(record.visual, record.temporal, "resample");

    if (target_len == src_len) return record;

    const std::size_t d = record.visual.cols();
    FeatureSequenceRecord out;
    out.label = record.label;
    out.id = record.id;
    out.visual = Tensor({target_len, d});
    out.temporal = Tensor({target_len, d});
    for (std::size_t j = 0; j < target_len; ++j) {
        const std::size_t src = j * src_len / target_len;
        for (std::size_t c = 0; c < d; ++c) {
            out.visual.at(j, c) = record.visual.at(src, c);
            out.temporal.at(j, c) = record.temporal.at(src, c);
        }
    }
    return out;
}

SplitResult split_observed_future(const FeatureSequenceRecord& record, const SplitSpec& spec) {
    if (!(spec.observed_fraction > 0.0) || !(spec.observed_fraction < 1.0))
        throw ConfigError("split: observed fraction must lie in (0,1), got " +
                          std::to_string(spec.observed_fraction));

    const FeatureSequenceRecord* source = &record;
    FeatureSequenceRecord resampled;
    if (spec.resample_len != 0 && spec.resample_len != record.visual.rows()) {
        resampled = resample_sequence(record, spec.resample_len);
        source = &resampled;
    }

    const std::size_t total = source->visual.rows();
    const std::size_t observed = static_cast<std::size_t>(
        std::llround(spec.observed_fraction * static_cast<double>(total)));
    if (observed == 0)
        throw ProtocolError("split: record " + record.id + " observed window is empty (" +
                            std::to_string(total) + " rows at fraction " +
                            std::to_string(spec.observed_fraction) + ")");
    const std::size_t horizon = spec.future_horizon == 0 ? observed : spec.future_horizon;
    if (observed + horizon > total)
        throw ProtocolError("split: record " + record.id + " needs " +
                            std::to_string(observed + horizon) + " rows, has " +
                            std::to_string(total));

    const std::size_t d = source->visual.cols();
    SplitResult out;
    out.label = source->label;
    out.observed_visual = Tensor({observed, d});
    out.observed_temporal = Tensor({observed, d});
    out.future_visual = Tensor({horizon, d});
    out.future_temporal = Tensor({horizon, d});
    for (std::size_t t = 0; t < observed; ++t)
        for (std::size_t c = 0; c < d; ++c) {
            out.observed_visual.at(t, c) = source->visual.at(t, c);
            out.observed_temporal.at(t, c) = source->temporal.at(t, c);
        }
    for (std::size_t t = 0; t < horizon; ++t)
        for (std::size_t c = 0; c < d; ++c) {
            out.future_visual.at(t, c) = source->visual.at(observed + t, c);
            out.future_temporal.at(t, c) = source->temporal.at(observed + t, c);
        }
    return out;
}

void save_dataset(const DatasetManifest& manifest, const std::string& path) {
    validate_manifest(manifest);

    std::string blob;
    blob.append(kMagic, 4);
    append_u32(blob, kVersion);
    append_u32(blob, static_cast<std::uint32_t>(manifest.num_classes));
    append_u32(blob, static_cast<std::uint32_t>(manifest.feature_dim));
    append_u64(blob, manifest.records.size());
    for (const FeatureSequenceRecord& r : manifest.records) {
        append_u32(blob, static_cast<std::uint32_t>(r.id.size()));
        blob += r.id;
        append_u32(blob, static_cast<std::uint32_t>(r.label));
        append_u32(blob, static_cast<std::uint32_t>(r.visual.rows()));
        for (double v : r.visual.values()) append_f32(blob, v);
        for (double v : r.temporal.values()) append_f32(blob, v);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("dataset container: cannot open " + path + " for writing");
    file.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!file) throw IoError("dataset container: failed writing " + path);
    file.close();

    nlohmann::json sidecar;
    sidecar["train"] = manifest.train_indices;
    sidecar["test"] = manifest.test_indices;
    if (manifest.has_generator) {
        const GeneratorConfig& g = manifest.generator;
        sidecar["generator"] = {{"classes", g.classes},
                                {"feature_dim", g.feature_dim},
                                {"samples_per_class", g.samples_per_class},
                                {"total_len", g.total_len},
                                {"noise", g.noise},
                                {"seed", g.seed},
                                {"train_fraction", g.train_fraction}};
    }
    std::ofstream side(path + ".json", std::ios::trunc);
    if (!side) throw IoError("dataset container: cannot open " + path + ".json for writing");
    side << sidecar.dump(2) << "\n";
    if (!side) throw IoError("dataset container: failed writing " + path + ".json");
}

DatasetManifest load_dataset(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("dataset container: cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    Reader in{blob, 0, {}};
    const std::string magic = in.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw IoError("dataset container: bad magic bytes in " + path);
    const std::uint32_t version = in.u32();
    if (version != kVersion)
        throw IoError("dataset container: unsupported version " + std::to_string(version));

    DatasetManifest manifest;
    manifest.num_classes = in.u32();
    manifest.feature_dim = in.u32();
    const std::uint64_t count = in.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        FeatureSequenceRecord r;
        const std::uint32_t id_len = in.u32();
        r.id = in.bytes(id_len);
        in.context = r.id;
        r.label = in.u32();
        const std::uint32_t t_total = in.u32();
        if (t_total == 0)
            throw IoError("dataset container: record " + r.id + " has no rows");
        r.visual = Tensor({t_total, manifest.feature_dim});
        r.temporal = Tensor({t_total, manifest.feature_dim});
        for (double& v : r.visual.values()) v = in.f32();
        for (double& v : r.temporal.values()) v = in.f32();
        in.context.clear();
        manifest.records.push_back(std::move(r));
    }
    if (in.pos != blob.size())
        throw IoError("dataset container: " + std::to_string(blob.size() - in.pos) +
                      " trailing bytes in " + path);

    std::ifstream side(path + ".json");
    if (side) {
        nlohmann::json sidecar;
        try {
            side >> sidecar;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("dataset container: malformed sidecar " + path + ".json: " +
                          e.what());
        }
        manifest.train_indices = sidecar.value("train", std::vector<std::size_t>{});
        manifest.test_indices = sidecar.value("test", std::vector<std::size_t>{});
        if (sidecar.contains("generator")) {
            const nlohmann::json& g = sidecar["generator"];
            manifest.has_generator = true;
            manifest.generator.classes = g.value("classes", std::size_t{0});
            manifest.generator.feature_dim = g.value("feature_dim", std::size_t{0});
            manifest.generator.samples_per_class = g.value("samples_per_class", std::size_t{0});
            manifest.generator.total_len = g.value("total_len", std::size_t{0});
            manifest.generator.noise = g.value("noise", 0.0);
            manifest.generator.seed = g.value("seed", std::uint64_t{0});
            manifest.generator.train_fraction = g.value("train_fraction", 0.0);
        }
    }

    validate_manifest(manifest);
    return manifest;
}

} // namespace aagan
