#include "sau/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "sau/errors.hpp"
#include "sau/hash.hpp"
#include "sau/rng.hpp"

namespace sau {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[7] = {'S', 'A', 'U', 'C', 'K', 'P', 'T'};
constexpr char kVersion = '1';

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
}

class Reader {
public:
    Reader(const std::vector<unsigned char>& bytes, std::size_t limit)
        : bytes_(bytes), limit_(limit) {}

    std::uint64_t take(int n) {
        if (pos_ + static_cast<std::size_t>(n) > limit_) {
            throw IoError("truncated checkpoint");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)])
                 << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::string take_string(std::size_t n) {
        if (pos_ + n > limit_) {
            throw IoError("truncated checkpoint");
        }
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t limit() const { return limit_; }

private:
    const std::vector<unsigned char>& bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

// 32-byte extension of the 64-bit content hash.
std::array<std::uint8_t, 32> extend_hash(std::uint64_t h) {
    std::array<std::uint8_t, 32> out{};
    std::uint64_t state = h;
    for (int block = 0; block < 4; ++block) {
        state = splitmix64(state);
        for (int i = 0; i < 8; ++i) {
            out[static_cast<std::size_t>(block * 8 + i)] =
                static_cast<std::uint8_t>(state >> (8 * i));
        }
    }
    return out;
}

void atomic_write(const std::string& path, const std::vector<unsigned char>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed: " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("rename failed: " + tmp + " -> " + path + ": " + ec.message());
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<Record>& records) {
    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 7);
    bytes.push_back(static_cast<unsigned char>(kVersion));
    put_u32(bytes, static_cast<std::uint32_t>(records.size()));
    for (const auto& r : records) {
        if (r.name.size() > 0xffff) {
            throw IoError("record name too long: " + r.name);
        }
        put_u16(bytes, static_cast<std::uint16_t>(r.name.size()));
        bytes.insert(bytes.end(), r.name.begin(), r.name.end());
        bytes.push_back(static_cast<unsigned char>(r.dtype));
        const std::int64_t n = checked_numel(r.shape);
        bytes.push_back(static_cast<unsigned char>(r.shape.size()));
        for (std::int64_t d : r.shape) {
            put_u64(bytes, static_cast<std::uint64_t>(d));
        }
        if (r.dtype == Dtype::f64) {
            if (static_cast<std::int64_t>(r.f64_data.size()) != n) {
                throw IoError("record payload size mismatch: " + r.name);
            }
            for (double v : r.f64_data) {
                put_u64(bytes, std::bit_cast<std::uint64_t>(v));
            }
        } else {
            if (static_cast<std::int64_t>(r.u8_data.size()) != n) {
                throw IoError("record payload size mismatch: " + r.name);
            }
            bytes.insert(bytes.end(), r.u8_data.begin(), r.u8_data.end());
        }
    }
    const auto digest = extend_hash(fnv1a64(bytes.data(), bytes.size()));
    bytes.insert(bytes.end(), digest.begin(), digest.end());
    atomic_write(path, bytes);
}

std::vector<Record> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 8 + 4 + 32) {
        throw IoError("truncated checkpoint: " + path);
    }
    for (int i = 0; i < 7; ++i) {
        if (bytes[static_cast<std::size_t>(i)] != static_cast<unsigned char>(kMagic[i])) {
            throw IoError("not a SAUCKPT file: " + path);
        }
    }
    if (bytes[7] != static_cast<unsigned char>(kVersion)) {
        throw VersionError("unknown checkpoint version '" +
                           std::string(1, static_cast<char>(bytes[7])) + "': " + path);
    }
    const std::size_t body_end = bytes.size() - 32;
    const auto expected = extend_hash(fnv1a64(bytes.data(), body_end));
    for (int i = 0; i < 32; ++i) {
        if (bytes[body_end + static_cast<std::size_t>(i)] != expected[static_cast<std::size_t>(i)]) {
            throw CorruptCheckpointError("content hash mismatch: " + path);
        }
    }
    Reader r(bytes, body_end);
    (void)r.take(8);  // magic + version, already checked
    const auto count = static_cast<std::uint32_t>(r.take(4));
    std::vector<Record> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Record rec;
        const auto name_len = static_cast<std::size_t>(r.take(2));
        rec.name = r.take_string(name_len);
        const auto dtype = static_cast<std::uint8_t>(r.take(1));
        if (dtype > 1) {
            throw IoError("unknown dtype in record " + rec.name);
        }
        rec.dtype = static_cast<Dtype>(dtype);
        const auto rank = static_cast<int>(r.take(1));
        for (int d = 0; d < rank; ++d) {
            rec.shape.push_back(static_cast<std::int64_t>(r.take(8)));
        }
        const std::int64_t n = checked_numel(rec.shape);
        if (rec.dtype == Dtype::f64) {
            rec.f64_data.reserve(static_cast<std::size_t>(n));
            for (std::int64_t k = 0; k < n; ++k) {
                rec.f64_data.push_back(std::bit_cast<double>(r.take(8)));
            }
        } else {
            rec.u8_data.reserve(static_cast<std::size_t>(n));
            for (std::int64_t k = 0; k < n; ++k) {
                rec.u8_data.push_back(static_cast<std::uint8_t>(r.take(1)));
            }
        }
        records.push_back(std::move(rec));
    }
    if (r.pos() != body_end) {
        throw IoError("trailing bytes after records: " + path);
    }
    return records;
}

namespace {

Record f64_record(std::string name, const Tensor& t) {
    Record r;
    r.name = std::move(name);
    r.dtype = Dtype::f64;
    r.shape = t.shape;
    r.f64_data = t.data;
    return r;
}

Record u8_mask_record(std::string name, const Tensor& t) {
    Record r;
    r.name = std::move(name);
    r.dtype = Dtype::u8;
    r.shape = t.shape;
    r.u8_data.reserve(t.data.size());
    for (double v : t.data) {
        r.u8_data.push_back(v != 0.0 ? 1 : 0);
    }
    return r;
}

Record json_record(std::string name, const ordered_json& j) {
    Record r;
    r.name = std::move(name);
    r.dtype = Dtype::u8;
    const std::string text = j.dump();
    r.shape = {static_cast<std::int64_t>(text.size())};
    r.u8_data.assign(text.begin(), text.end());
    return r;
}

ordered_json parse_json_record(const Record& r) {
    return ordered_json::parse(std::string(r.u8_data.begin(), r.u8_data.end()));
}

Tensor tensor_from_f64(const Record& r) { return Tensor(r.shape, r.f64_data); }

Tensor tensor_from_u8(const Record& r) {
    std::vector<double> data(r.u8_data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = r.u8_data[i] != 0 ? 1.0 : 0.0;
    }
    return Tensor(r.shape, std::move(data));
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t from_hex64(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

}  // namespace

std::vector<Record> CheckpointBundle::to_records() const {
    std::vector<Record> records;
    if (params) {
        ordered_json meta;
        if (model_config) {
            meta["model"] = {{"arch", arch_name(model_config->arch)},
                             {"widths", model_config->widths},
                             {"vocab", model_config->vocab},
                             {"context_len", model_config->context_len},
                             {"seed", model_config->seed}};
        }
        meta["prunable"] = ordered_json::array();
        for (const auto& e : params->entries()) {
            if (e.prunable) {
                meta["prunable"].push_back(e.name);
            }
        }
        records.push_back(json_record("meta", meta));
        for (const auto& e : params->entries()) {
            records.push_back(f64_record("param/" + e.name, e.tensor));
        }
    }
    if (mask) {
        records.push_back(json_record("mask_meta",
                                      ordered_json{{"sparsity", mask->target_sparsity}}));
        for (const auto& l : mask->layers) {
            records.push_back(u8_mask_record("mask/" + l.name, l.mask));
        }
    }
    if (saliency) {
        records.push_back(json_record(
            "saliency_meta", ordered_json{{"samples", saliency->sample_count}}));
        for (const auto& e : saliency->scores.entries()) {
            records.push_back(f64_record("saliency/" + e.name, e.tensor));
        }
    }
    if (plan) {
        ordered_json meta;
        meta["topk_ratio"] = plan->config.topk_ratio;
        meta["alpha"] = plan->config.alpha;
        meta["mask_hash"] = hex64(plan->mask_hash);
        meta["saliency_hash"] = hex64(plan->saliency_hash);
        meta["layers"] = ordered_json::array();
        for (const auto& l : plan->layers) {
            // +inf marks "nothing selected"; JSON has no infinity literal.
            ordered_json tau;
            if (std::isfinite(l.threshold)) {
                tau = l.threshold;
            } else {
                tau = "inf";
            }
            meta["layers"].push_back({{"name", l.name},
                                      {"i_pruned", l.pruned_importance},
                                      {"tau", tau},
                                      {"zero_survivors", l.zero_survivors}});
        }
        records.push_back(json_record("plan_meta", meta));
        for (const auto& l : plan->layers) {
            records.push_back(u8_mask_record("plan_g/" + l.name, l.gate));
            records.push_back(f64_record("plan_w/" + l.name, l.weights));
        }
    }
    return records;
}

CheckpointBundle CheckpointBundle::from_records(const std::vector<Record>& records) {
    CheckpointBundle bundle;
    auto find = [&](const std::string& name) -> const Record* {
        for (const auto& r : records) {
            if (r.name == name) {
                return &r;
            }
        }
        return nullptr;
    };

    if (const Record* meta = find("meta")) {
        const auto j = parse_json_record(*meta);
        if (j.contains("model")) {
            ModelConfig mc;
            mc.arch = arch_from_name(j["model"].at("arch").get<std::string>());
            mc.widths = j["model"].at("widths").get<std::vector<int>>();
            mc.vocab = j["model"].at("vocab").get<int>();
            mc.context_len = j["model"].at("context_len").get<int>();
            mc.seed = j["model"].at("seed").get<std::uint64_t>();
            bundle.model_config = mc;
        }
        std::vector<std::string> prunable = j.at("prunable").get<std::vector<std::string>>();
        ParamSet params;
        for (const auto& r : records) {
            if (r.name.rfind("param/", 0) == 0) {
                const std::string name = r.name.substr(6);
                const bool is_prunable =
                    std::find(prunable.begin(), prunable.end(), name) != prunable.end();
                Tensor t = tensor_from_f64(r);
                t.requires_grad = true;
                params.add(name, std::move(t), is_prunable);
            }
        }
        bundle.params = std::move(params);
    }

    if (const Record* meta = find("mask_meta")) {
        SparsityMask mask;
        mask.target_sparsity = parse_json_record(*meta).at("sparsity").get<double>();
        for (const auto& r : records) {
            if (r.name.rfind("mask/", 0) == 0) {
                mask.layers.push_back({r.name.substr(5), tensor_from_u8(r)});
            }
        }
        bundle.mask = std::move(mask);
    }

    if (const Record* meta = find("saliency_meta")) {
        SaliencyMap sal;
        sal.sample_count = parse_json_record(*meta).at("samples").get<std::int64_t>();
        std::vector<std::string> prunable;
        if (bundle.params) {
            for (const auto& e : bundle.params->entries()) {
                if (e.prunable) {
                    prunable.push_back(e.name);
                }
            }
        }
        for (const auto& r : records) {
            if (r.name.rfind("saliency/", 0) == 0) {
                const std::string name = r.name.substr(9);
                const bool is_prunable =
                    std::find(prunable.begin(), prunable.end(), name) != prunable.end();
                sal.scores.add(name, tensor_from_f64(r), is_prunable);
            }
        }
        bundle.saliency = std::move(sal);
    }

    if (const Record* meta = find("plan_meta")) {
        const auto j = parse_json_record(*meta);
        SAUPlan plan;
        plan.config.topk_ratio = j.at("topk_ratio").get<double>();
        plan.config.alpha = j.at("alpha").get<double>();
        plan.mask_hash = from_hex64(j.at("mask_hash").get<std::string>());
        plan.saliency_hash = from_hex64(j.at("saliency_hash").get<std::string>());
        for (const auto& lj : j.at("layers")) {
            SAUPlan::Layer layer;
            layer.name = lj.at("name").get<std::string>();
            layer.pruned_importance = lj.at("i_pruned").get<double>();
            layer.threshold = lj.at("tau").is_string()
                                  ? std::numeric_limits<double>::infinity()
                                  : lj.at("tau").get<double>();
            layer.zero_survivors = lj.at("zero_survivors").get<bool>();
            const Record* g = find("plan_g/" + layer.name);
            const Record* w = find("plan_w/" + layer.name);
            if (!g || !w) {
                throw IoError("plan records missing for layer " + layer.name);
            }
            layer.gate = tensor_from_u8(*g);
            layer.weights = tensor_from_f64(*w);
            plan.layers.push_back(std::move(layer));
        }
        bundle.plan = std::move(plan);
    }
    return bundle;
}

void save_bundle(const std::string& path, const CheckpointBundle& bundle) {
    save_checkpoint(path, bundle.to_records());
}

CheckpointBundle load_bundle(const std::string& path) {
    return CheckpointBundle::from_records(load_checkpoint(path));
}

Model load_model(const std::string& path) {
    CheckpointBundle bundle = load_bundle(path);
    if (!bundle.model_config || !bundle.params) {
        throw IoError("checkpoint has no model: " + path);
    }
    Model model = Model::init(*bundle.model_config);
    model.set_params(std::move(*bundle.params));
    return model;
}

}  // namespace sau
