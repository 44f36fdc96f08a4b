#include "kprnn/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <zlib.h>

#include "kprnn/error.hpp"
#include "kprnn/pose_io.hpp"

namespace kprnn {

namespace {

using nlohmann::json;

constexpr std::size_t kEvalChunk = 64;
constexpr std::uint64_t kSplitSalt = 0x5EED5B117ULL;
constexpr std::uint64_t kTrainSalt = 0x9E3779B97F4A7C15ULL;
constexpr char kMagic[4] = {'K', 'P', 'R', 'N'};

template <typename T>
T read_field(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config field '") + key + "' has the wrong type");
    }
}

void shuffle(std::vector<std::size_t>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(v[i - 1], v[pick(rng)]);
    }
}

Matrix column_matrix(std::span<const TrainingPair> pairs, std::span<const std::size_t> idx, bool masks)
{
    Matrix m(static_cast<Eigen::Index>(kPoseDims), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const double* src = masks ? pairs[idx[b]].mask.data() : pairs[idx[b]].target.data();
        m.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const Vector>(src, kPoseDims);
    }
    return m;
}

SequenceBatch window_batch(std::span<const TrainingPair> pairs, std::span<const std::size_t> idx)
{
    std::vector<std::span<const PoseVector>> windows;
    windows.reserve(idx.size());
    for (auto i : idx)
        windows.emplace_back(pairs[i].window);
    return SequenceBatch::from_windows(windows);
}

bool mask_empty(const PoseMask& m)
{
    return std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; });
}

// Little-endian byte writer / reader for the checkpoint format.
class ByteWriter {
public:
    void bytes(std::string_view b) { out_.append(b); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void matrix(const Matrix& m)
    {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                f64(m(r, c));
    }
    void vector(const Vector& v)
    {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            f64(v(i));
    }
    std::string& str() { return out_; }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}

    std::string_view bytes(std::size_t n)
    {
        need(n);
        auto out = in_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void matrix(Matrix& m)
    {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = f64();
    }
    void vector(Vector& v)
    {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = f64();
    }
    [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n)
            throw DataError("corrupt checkpoint: truncated");
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

void Hyperparameters::validate() const
{
    if (lstm_layers == 0 || lstm_size == 0)
        throw UsageError("need at least one LSTM layer of positive size");
    if (dense_hidden_layers > 0 && dense_hidden_size == 0)
        throw UsageError("dense_hidden_size must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw UsageError("dropout must be in [0,1)");
    if (!(lr_end > 0.0 && lr_start >= lr_end) || !std::isfinite(lr_start))
        throw UsageError("learning rates must satisfy lr_start >= lr_end > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw UsageError("momentum must be in [0,1)");
    if (max_epochs == 0)
        throw UsageError("max_epochs must be at least 1");
    if (loss != "mse")
        throw UsageError("only the 'mse' loss is supported");
    if (window_length == 0)
        throw UsageError("window_length must be at least 1");
    if (batch_size == 0)
        throw UsageError("batch_size must be at least 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw UsageError("val_fraction must be in (0,1)");
    if (early_stop_patience && *early_stop_patience == 0)
        throw UsageError("early_stop_patience must be positive when set");
    if (!std::isfinite(forget_bias))
        throw UsageError("forget_bias must be finite");
}

NetworkDims Hyperparameters::dims() const
{
    NetworkDims d;
    d.lstm_layers = lstm_layers;
    d.lstm_size = lstm_size;
    d.dense_layers = dense_hidden_layers;
    d.dense_size = dense_hidden_size;
    return d;
}

json Hyperparameters::to_json() const
{
    json j;
    j["lstm_layers"] = lstm_layers;
    j["lstm_size"] = lstm_size;
    j["dense_hidden_layers"] = dense_hidden_layers;
    j["dense_hidden_size"] = dense_hidden_size;
    j["dropout"] = dropout;
    j["lr_start"] = lr_start;
    j["lr_end"] = lr_end;
    j["momentum"] = momentum;
    j["max_epochs"] = max_epochs;
    j["loss"] = loss;
    j["window_length"] = window_length;
    j["batch_size"] = batch_size;
    j["val_fraction"] = val_fraction;
    j["seed"] = seed;
    j["mask_missing"] = mask_missing;
    j["early_stop_patience"] = early_stop_patience ? json(*early_stop_patience) : json(nullptr);
    j["forget_bias"] = forget_bias;
    return j;
}

Hyperparameters Hyperparameters::from_json(const json& j)
{
    if (!j.is_object())
        throw UsageError("config must be a JSON object");
    static const std::set<std::string> known = {
        "lstm_layers", "lstm_size",     "dense_hidden_layers", "dense_hidden_size", "dropout",
        "lr_start",    "lr_end",        "momentum",            "max_epochs",        "loss",
        "window_length", "batch_size",  "val_fraction",        "seed",              "mask_missing",
        "early_stop_patience", "forget_bias"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key))
            throw UsageError("unknown config field '" + key + "'");
    }
    Hyperparameters h;
    auto opt = [&j](const char* key, auto& field) {
        if (j.contains(key))
            field = read_field<std::decay_t<decltype(field)>>(j, key);
    };
    opt("lstm_layers", h.lstm_layers);
    opt("lstm_size", h.lstm_size);
    opt("dense_hidden_layers", h.dense_hidden_layers);
    opt("dense_hidden_size", h.dense_hidden_size);
    opt("dropout", h.dropout);
    opt("lr_start", h.lr_start);
    opt("lr_end", h.lr_end);
    opt("momentum", h.momentum);
    opt("max_epochs", h.max_epochs);
    opt("loss", h.loss);
    opt("window_length", h.window_length);
    opt("batch_size", h.batch_size);
    opt("val_fraction", h.val_fraction);
    opt("seed", h.seed);
    opt("mask_missing", h.mask_missing);
    opt("forget_bias", h.forget_bias);
    if (j.contains("early_stop_patience") && !j["early_stop_patience"].is_null())
        h.early_stop_patience = read_field<std::size_t>(j, "early_stop_patience");
    h.validate();
    return h;
}

double learning_rate(const Hyperparameters& hyper, std::size_t epoch)
{
    if (hyper.max_epochs <= 1)
        return hyper.lr_start;
    const double frac = static_cast<double>(std::min(epoch, hyper.max_epochs - 1)) /
                        static_cast<double>(hyper.max_epochs - 1);
    return hyper.lr_start + (hyper.lr_end - hyper.lr_start) * frac;
}

std::vector<TrainingPair> make_windows(const std::vector<PoseSequence>& seqs, std::size_t window_length)
{
    if (window_length == 0)
        throw UsageError("window length must be at least 1");
    std::vector<TrainingPair> pairs;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        const auto& seq = seqs[s];
        if (seq.space() != CoordinateSpace::normalized)
            throw UsageError("make_windows expects normalized sequences");
        if (seq.size() <= window_length)
            continue;
        std::vector<PoseVector> vectors;
        std::vector<PoseMask> masks;
        vectors.reserve(seq.size());
        for (const auto& frame : seq.frames()) {
            vectors.push_back(frame_to_vector(frame, seq.space()));
            PoseMask m{};
            for (std::size_t j = 0; j < kJointCount; ++j)
                m[2 * j] = m[2 * j + 1] = frame[j].missing() ? 0.0 : 1.0;
            masks.push_back(m);
        }
        for (std::size_t t = window_length; t < seq.size(); ++t) {
            TrainingPair p;
            p.window.assign(vectors.begin() + static_cast<std::ptrdiff_t>(t - window_length),
                            vectors.begin() + static_cast<std::ptrdiff_t>(t));
            p.target = vectors[t];
            p.mask = masks[t];
            p.sequence = s;
            p.target_frame = seq.frames()[t].frame_index();
            pairs.push_back(std::move(p));
        }
    }
    if (pairs.empty())
        throw UsageError("every sequence is too short for window length " + std::to_string(window_length));
    return pairs;
}

DataSplit split_pairs(std::span<const TrainingPair> pairs, double val_fraction, std::uint64_t seed)
{
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw UsageError("val_fraction must be in (0,1)");
    std::vector<std::size_t> ids;
    for (const auto& p : pairs)
        ids.push_back(p.sequence);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    DataSplit split;
    if (ids.size() >= 2) {
        Rng rng(seed ^ kSplitSalt);
        shuffle(ids, rng);
        const auto n_val = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(ids.size()))), 1, ids.size() - 1);
        const std::set<std::size_t> val_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
        for (std::size_t i = 0; i < pairs.size(); ++i)
            (val_ids.contains(pairs[i].sequence) ? split.val : split.train).push_back(i);
    } else {
        if (pairs.size() < 2)
            throw UsageError("need at least two training pairs to hold out validation data");
        const auto n_val = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(pairs.size()))), 1,
            pairs.size() - 1);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            (i + n_val >= pairs.size() ? split.val : split.train).push_back(i);
    }
    return split;
}

std::vector<PoseVector> predict_pairs(const NetworkParams& params, std::span<const TrainingPair> pairs,
                                      std::span<const std::size_t> indices)
{
    std::vector<PoseVector> out;
    out.reserve(indices.size());
    ForwardCache cache;
    for (std::size_t start = 0; start < indices.size(); start += kEvalChunk) {
        const auto chunk = indices.subspan(start, std::min(kEvalChunk, indices.size() - start));
        forward(window_batch(pairs, chunk), params, std::nullopt, cache);
        const Matrix& y = cache.output();
        if (!y.allFinite())
            throw NumericalError("network produced non-finite output");
        for (Eigen::Index b = 0; b < y.cols(); ++b)
            out.emplace_back(std::span<const double>(y.col(b).data(), kPoseDims));
    }
    return out;
}

double evaluate_rmse(const NetworkParams& params, std::span<const TrainingPair> pairs,
                     std::span<const std::size_t> indices, bool use_masks)
{
    const auto preds = predict_pairs(params, pairs, indices);
    std::vector<PoseVector> targets;
    std::vector<PoseMask> masks;
    for (auto i : indices) {
        targets.push_back(pairs[i].target);
        if (use_masks)
            masks.push_back(pairs[i].mask);
    }
    return rmse(preds, targets, masks);
}

double persistence_rmse(std::span<const TrainingPair> pairs, std::span<const std::size_t> indices, bool use_masks)
{
    std::vector<PoseVector> preds;
    std::vector<PoseVector> targets;
    std::vector<PoseMask> masks;
    for (auto i : indices) {
        preds.push_back(pairs[i].window.back());
        targets.push_back(pairs[i].target);
        if (use_masks)
            masks.push_back(pairs[i].mask);
    }
    return rmse(preds, targets, masks);
}

void momentum_update(std::span<double> params, std::span<double> velocity, std::span<const double> grads, double lr,
                     double momentum)
{
    if (params.size() != velocity.size() || params.size() != grads.size())
        throw UsageError("momentum_update: size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] - lr * grads[i];
        params[i] += velocity[i];
    }
}

TrainResult train(std::span<const TrainingPair> pairs, const Hyperparameters& hyper, const TrainOptions& options)
{
    hyper.validate();
    if (pairs.empty())
        throw UsageError("no training pairs");
    for (const auto& p : pairs) {
        if (p.window.size() != hyper.window_length)
            throw UsageError("pair window length " + std::to_string(p.window.size()) +
                             " does not match window_length " + std::to_string(hyper.window_length));
    }

    auto split = split_pairs(pairs, hyper.val_fraction, hyper.seed);
    const bool use_masks = hyper.mask_missing;
    if (use_masks) {
        auto drop_empty = [&](std::vector<std::size_t>& v) {
            std::erase_if(v, [&](std::size_t i) { return mask_empty(pairs[i].mask); });
        };
        drop_empty(split.train);
        drop_empty(split.val);
    }
    if (split.train.empty() || split.val.empty())
        throw UsageError("train/validation split left an empty side");

    const auto dims = hyper.dims();
    auto params = init_params(dims, hyper.seed, InitOptions{hyper.forget_bias});
    auto velocity = Gradients::zeros(dims);
    auto grads = Gradients::zeros(dims);
    ForwardCache cache;
    BackwardScratch scratch;
    Rng rng(hyper.seed ^ kTrainSalt);

    TrainResult result;
    std::vector<std::size_t> order = split.train;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::size_t epoch = 0;

    for (; epoch < hyper.max_epochs; ++epoch) {
        const double lr = learning_rate(hyper, epoch);
        shuffle(order, rng);

        for (std::size_t start = 0, batch_no = 0; start < order.size(); start += hyper.batch_size, ++batch_no) {
            const auto idx = std::span<const std::size_t>(order).subspan(
                start, std::min(hyper.batch_size, order.size() - start));
            const auto sb = window_batch(pairs, idx);
            const Matrix targets = column_matrix(pairs, idx, false);
            const Matrix mask = use_masks ? column_matrix(pairs, idx, true) : Matrix();

            std::optional<DropoutMasks> drop;
            if (hyper.dropout > 0.0)
                drop = sample_dropout(dims, sb.steps, sb.batch, hyper.dropout, rng);
            forward(sb, params, std::move(drop), cache);

            const Matrix& y = cache.output();
            double loss = 0.0;
            for (Eigen::Index b = 0; b < y.cols(); ++b) {
                const auto mcol = use_masks ? std::optional<std::span<const double>>(
                                                  std::span<const double>(mask.col(b).data(), kPoseDims))
                                            : std::nullopt;
                loss += mse_loss(std::span<const double>(y.col(b).data(), kPoseDims),
                                 std::span<const double>(targets.col(b).data(), kPoseDims), mcol);
            }
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << batch_no << ", lr " << lr;
                throw NumericalError(msg.str());
            }

            backward(cache, params, targets, use_masks ? &mask : nullptr, grads, scratch);
            auto p_tensors = params.tensors();
            auto v_tensors = velocity.tensors();
            const auto g_tensors = grads.tensors();
            for (std::size_t t = 0; t < p_tensors.size(); ++t)
                momentum_update(p_tensors[t], v_tensors[t], g_tensors[t], lr, hyper.momentum);
        }

        TrainingRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_rmse = evaluate_rmse(params, pairs, split.train, use_masks);
        rec.val_rmse = evaluate_rmse(params, pairs, split.val, use_masks);
        if (!std::isfinite(rec.train_rmse) || !std::isfinite(rec.val_rmse)) {
            std::ostringstream msg;
            msg << "non-finite RMSE after epoch " << epoch << ", lr " << lr;
            throw NumericalError(msg.str());
        }
        result.records.push_back(rec);
        if (options.on_epoch)
            options.on_epoch(rec);

        if (hyper.early_stop_patience) {
            if (rec.val_rmse < best_val) {
                best_val = rec.val_rmse;
                since_best = 0;
            } else if (++since_best >= *hyper.early_stop_patience) {
                ++epoch;
                break;
            }
        }
    }

    std::ostringstream state;
    state << rng;
    result.checkpoint.params = std::move(params);
    result.checkpoint.hyper = hyper;
    result.checkpoint.epoch = epoch;
    result.checkpoint.rng_state = state.str();
    result.checkpoint.width = options.width;
    result.checkpoint.height = options.height;
    return result;
}

std::string serialize_checkpoint(const Checkpoint& ckpt)
{
    const auto dims = ckpt.params.dims();
    if (!(ckpt.hyper.dims() == dims))
        throw UsageError("checkpoint hyperparameters do not match parameter shapes");

    json meta;
    meta["hyperparameters"] = ckpt.hyper.to_json();
    meta["epoch"] = ckpt.epoch;
    meta["seed"] = ckpt.hyper.seed;
    meta["rng_state"] = ckpt.rng_state;
    meta["normalization"] = {{"width", ckpt.width}, {"height", ckpt.height}};
    meta["gate_order"] = "i,f,g,o";
    const auto meta_text = meta.dump();

    ByteWriter w;
    w.bytes(std::string_view(kMagic, 4));
    w.u32(ckpt.format_version);
    const std::size_t dim_values[] = {dims.input,      dims.lstm_size,    dims.lstm_layers,
                                      dims.dense_size, dims.dense_layers, dims.output};
    w.u32(static_cast<std::uint32_t>(std::size(dim_values)));
    for (auto d : dim_values)
        w.u32(static_cast<std::uint32_t>(d));
    w.u64(meta_text.size());
    w.bytes(meta_text);
    w.u64(ckpt.params.parameter_count());
    for (const auto& layer : ckpt.params.lstm) {
        w.matrix(layer.input_weights);
        w.matrix(layer.recurrent_weights);
        w.vector(layer.bias);
    }
    for (const auto& layer : ckpt.params.dense) {
        w.matrix(layer.weights);
        w.vector(layer.bias);
    }
    const auto crc = crc32_of(w.str());
    w.u32(crc);
    return std::move(w.str());
}

Checkpoint deserialize_checkpoint(std::string_view bytes)
{
    if (bytes.size() < 12)
        throw DataError("corrupt checkpoint: truncated");
    const auto body = bytes.substr(0, bytes.size() - 4);
    ByteReader tail(bytes.substr(bytes.size() - 4));
    if (tail.u32() != crc32_of(body))
        throw DataError("corrupt checkpoint: checksum mismatch");

    ByteReader r(body);
    if (r.bytes(4) != std::string_view(kMagic, 4))
        throw DataError("not a KP-RNN checkpoint (bad magic)");
    Checkpoint ckpt;
    ckpt.format_version = r.u32();
    if (ckpt.format_version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(ckpt.format_version));
    if (r.u32() != 6)
        throw DataError("checkpoint dimension header has unexpected length");
    NetworkDims dims;
    dims.input = r.u32();
    dims.lstm_size = r.u32();
    dims.lstm_layers = r.u32();
    dims.dense_size = r.u32();
    dims.dense_layers = r.u32();
    dims.output = r.u32();
    try {
        dims.validate();
    } catch (const UsageError& e) {
        throw DataError(std::string("checkpoint dimension mismatch: ") + e.what());
    }

    const auto meta_len = r.u64();
    if (meta_len > r.remaining())
        throw DataError("corrupt checkpoint: truncated");
    json meta;
    try {
        meta = json::parse(r.bytes(static_cast<std::size_t>(meta_len)));
        ckpt.hyper = Hyperparameters::from_json(meta.at("hyperparameters"));
        ckpt.epoch = meta.at("epoch").get<std::size_t>();
        ckpt.rng_state = meta.at("rng_state").get<std::string>();
        ckpt.width = meta.at("normalization").at("width").get<double>();
        ckpt.height = meta.at("normalization").at("height").get<double>();
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint metadata invalid: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("checkpoint metadata invalid: ") + e.what());
    }
    const auto hd = ckpt.hyper.dims();
    if (!(hd == dims) || dims.input != kPoseDims || dims.output != kPoseDims)
        throw DataError("checkpoint dimension mismatch between header and hyperparameters");

    ckpt.params = NetworkParams::zeros(dims);
    if (r.u64() != ckpt.params.parameter_count())
        throw DataError("checkpoint dimension mismatch: tensor value count");
    for (auto& layer : ckpt.params.lstm) {
        r.matrix(layer.input_weights);
        r.matrix(layer.recurrent_weights);
        r.vector(layer.bias);
    }
    for (auto& layer : ckpt.params.dense) {
        r.matrix(layer.weights);
        r.vector(layer.bias);
    }
    if (r.remaining() != 0)
        throw DataError("corrupt checkpoint: trailing bytes");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path)
{
    write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    try {
        return deserialize_checkpoint(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace kprnn
