#include "kprnn/kp_rnn.hpp"

#include <cmath>

#include "kprnn/error.hpp"

namespace kprnn {

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z)
{
    return (1.0 + (-z).exp()).inverse();
}

// tanh(x) = 2*sigmoid(2x) - 1. Eigen's vectorized exp is much faster than its double tanh.
template <typename Derived>
auto tanh_fast(const Eigen::ArrayBase<Derived>& z)
{
    return 2.0 * (1.0 + (-2.0 * z).exp()).inverse() - 1.0;
}

void check_dims(bool ok, const std::string& what)
{
    if (!ok)
        throw UsageError("dimension mismatch: " + what);
}

// Row-major fill so the draw order does not depend on Eigen's storage order.
void fill_uniform(Matrix& m, double limit, Rng& rng)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
}

double glorot_limit(const Matrix& m)
{
    return std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
}

}  // namespace

double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void NetworkDims::validate() const
{
    if (input == 0 || lstm_size == 0 || lstm_layers == 0 || output == 0)
        throw UsageError("network dimensions must be positive and have at least one LSTM layer");
    if (dense_layers > 0 && dense_size == 0)
        throw UsageError("dense hidden layers need a positive size");
}

template <typename Tag>
TensorSet<Tag> TensorSet<Tag>::zeros(const NetworkDims& dims)
{
    dims.validate();
    const auto H = static_cast<Eigen::Index>(dims.lstm_size);
    TensorSet out;
    for (std::size_t l = 0; l < dims.lstm_layers; ++l) {
        const auto in = static_cast<Eigen::Index>(l == 0 ? dims.input : dims.lstm_size);
        out.lstm.push_back({Matrix::Zero(4 * H, in), Matrix::Zero(4 * H, H), Vector::Zero(4 * H)});
    }
    auto in = H;
    for (std::size_t k = 0; k < dims.dense_layers; ++k) {
        const auto D = static_cast<Eigen::Index>(dims.dense_size);
        out.dense.push_back({Matrix::Zero(D, in), Vector::Zero(D)});
        in = D;
    }
    const auto O = static_cast<Eigen::Index>(dims.output);
    out.dense.push_back({Matrix::Zero(O, in), Vector::Zero(O)});
    return out;
}

template <typename Tag>
NetworkDims TensorSet<Tag>::dims() const
{
    if (lstm.empty() || dense.empty())
        throw UsageError("tensor set is empty");
    NetworkDims d;
    d.input = static_cast<std::size_t>(lstm.front().input_weights.cols());
    d.lstm_size = static_cast<std::size_t>(lstm.front().recurrent_weights.cols());
    d.lstm_layers = lstm.size();
    d.dense_layers = dense.size() - 1;
    d.dense_size = d.dense_layers > 0 ? static_cast<std::size_t>(dense.front().bias.size()) : 0;
    d.output = static_cast<std::size_t>(dense.back().bias.size());
    return d;
}

template <typename Tag>
std::size_t TensorSet<Tag>::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& t : tensors())
        n += t.size();
    return n;
}

template <typename Tag>
std::vector<std::span<double>> TensorSet<Tag>::tensors()
{
    std::vector<std::span<double>> out;
    auto add = [&out](auto& m) { out.emplace_back(m.data(), static_cast<std::size_t>(m.size())); };
    for (auto& layer : lstm) {
        add(layer.input_weights);
        add(layer.recurrent_weights);
        add(layer.bias);
    }
    for (auto& layer : dense) {
        add(layer.weights);
        add(layer.bias);
    }
    return out;
}

template <typename Tag>
std::vector<std::span<const double>> TensorSet<Tag>::tensors() const
{
    std::vector<std::span<const double>> out;
    for (auto t : const_cast<TensorSet*>(this)->tensors())
        out.emplace_back(t.data(), t.size());
    return out;
}

template <typename Tag>
std::vector<std::string> TensorSet<Tag>::tensor_names() const
{
    std::vector<std::string> out;
    for (std::size_t l = 0; l < lstm.size(); ++l) {
        const auto p = "lstm" + std::to_string(l);
        out.push_back(p + ".W");
        out.push_back(p + ".U");
        out.push_back(p + ".bias");
    }
    for (std::size_t k = 0; k < dense.size(); ++k) {
        const auto p = "dense" + std::to_string(k);
        out.push_back(p + ".weights");
        out.push_back(p + ".bias");
    }
    return out;
}

template <typename Tag>
bool TensorSet<Tag>::all_finite() const
{
    for (const auto& t : tensors())
        for (double v : t)
            if (!std::isfinite(v))
                return false;
    return true;
}

template struct TensorSet<ParamsTag>;
template struct TensorSet<GradientsTag>;

NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed, const InitOptions& options)
{
    auto params = NetworkParams::zeros(dims);
    Rng rng(seed);
    const auto H = static_cast<Eigen::Index>(dims.lstm_size);
    for (auto& layer : params.lstm) {
        fill_uniform(layer.input_weights, glorot_limit(layer.input_weights), rng);
        fill_uniform(layer.recurrent_weights, glorot_limit(layer.recurrent_weights), rng);
        layer.bias.segment(H, H).setConstant(options.forget_bias);
    }
    for (auto& layer : params.dense)
        fill_uniform(layer.weights, glorot_limit(layer.weights), rng);
    return params;
}

CellState lstm_cell(const Vector& x, const CellState& prev, const LstmLayer& layer)
{
    const auto H = layer.recurrent_weights.cols();
    check_dims(layer.input_weights.rows() == 4 * H && layer.recurrent_weights.rows() == 4 * H &&
                   layer.bias.size() == 4 * H,
               "LSTM layer tensors");
    check_dims(x.size() == layer.input_weights.cols(), "LSTM input");
    check_dims(prev.h.size() == H && prev.c.size() == H, "LSTM state");

    const Vector z = layer.input_weights * x + layer.recurrent_weights * prev.h + layer.bias;
    const Eigen::ArrayXd i = sigmoid(z.segment(0, H).array());
    const Eigen::ArrayXd f = sigmoid(z.segment(H, H).array());
    const Eigen::ArrayXd g = tanh_fast(z.segment(2 * H, H).array());
    const Eigen::ArrayXd o = sigmoid(z.segment(3 * H, H).array());
    CellState next;
    next.c = (f * prev.c.array() + i * g).matrix();
    next.h = (o * tanh_fast(next.c.array())).matrix();
    return next;
}

SequenceBatch SequenceBatch::from_window(std::span<const Vector> window)
{
    if (window.empty())
        throw UsageError("window must not be empty");
    SequenceBatch out;
    out.steps = window.size();
    out.batch = 1;
    out.inputs.resize(window.front().size(), static_cast<Eigen::Index>(window.size()));
    for (std::size_t t = 0; t < window.size(); ++t) {
        check_dims(window[t].size() == out.inputs.rows(), "window step length");
        out.inputs.col(static_cast<Eigen::Index>(t)) = window[t];
    }
    return out;
}

SequenceBatch SequenceBatch::from_window(std::span<const PoseVector> window)
{
    return from_windows({window});
}

SequenceBatch SequenceBatch::from_windows(const std::vector<std::span<const PoseVector>>& windows)
{
    if (windows.empty() || windows.front().empty())
        throw UsageError("window batch must not be empty");
    SequenceBatch out;
    out.steps = windows.front().size();
    out.batch = windows.size();
    out.inputs.resize(static_cast<Eigen::Index>(kPoseDims), static_cast<Eigen::Index>(out.steps * out.batch));
    for (std::size_t b = 0; b < windows.size(); ++b) {
        if (windows[b].size() != out.steps)
            throw UsageError("all windows in a batch must have the same length");
        for (std::size_t t = 0; t < out.steps; ++t)
            out.inputs.col(static_cast<Eigen::Index>(t * out.batch + b)) =
                Eigen::Map<const Vector>(windows[b][t].data(), kPoseDims);
    }
    return out;
}

DropoutMasks sample_dropout(const NetworkDims& dims, std::size_t steps, std::size_t batch, double rate, Rng& rng)
{
    if (!(rate >= 0.0 && rate < 1.0))
        throw UsageError("dropout rate must be in [0,1)");
    const double keep_scale = 1.0 / (1.0 - rate);
    auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                m(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
        return m;
    };
    DropoutMasks masks;
    masks.rate = rate;
    const auto H = static_cast<Eigen::Index>(dims.lstm_size);
    const auto N = static_cast<Eigen::Index>(steps * batch);
    for (std::size_t l = 0; l < dims.lstm_layers; ++l)
        masks.lstm.push_back(draw(H, N));
    for (std::size_t k = 0; k < dims.dense_layers; ++k)
        masks.dense.push_back(draw(static_cast<Eigen::Index>(dims.dense_size), static_cast<Eigen::Index>(batch)));
    return masks;
}

ForwardCache forward(const SequenceBatch& sb, const NetworkParams& params, std::optional<DropoutMasks> masks)
{
    ForwardCache cache;
    forward(sb, params, std::move(masks), cache);
    return cache;
}

void forward(const SequenceBatch& sb, const NetworkParams& params, std::optional<DropoutMasks> masks,
             ForwardCache& cache)
{
    const auto dims = params.dims();
    const auto T = static_cast<Eigen::Index>(sb.steps);
    const auto B = static_cast<Eigen::Index>(sb.batch);
    const auto N = T * B;
    const auto H = static_cast<Eigen::Index>(dims.lstm_size);
    if (T == 0 || B == 0)
        throw UsageError("window must not be empty");
    check_dims(sb.inputs.rows() == static_cast<Eigen::Index>(dims.input), "input width");
    check_dims(sb.inputs.cols() == N, "input column count");
    if (masks) {
        check_dims(masks->lstm.size() == params.lstm.size() && masks->dense.size() == dims.dense_layers,
                   "dropout mask layers");
        for (const auto& m : masks->lstm)
            check_dims(m.rows() == H && m.cols() == N, "LSTM dropout mask");
        for (const auto& m : masks->dense)
            check_dims(m.rows() == static_cast<Eigen::Index>(dims.dense_size) && m.cols() == B, "dense dropout mask");
    }

    cache.steps = sb.steps;
    cache.batch = sb.batch;
    cache.lstm.resize(params.lstm.size());
    cache.dense.resize(params.dense.size());

    for (std::size_t l = 0; l < params.lstm.size(); ++l) {
        const auto& layer = params.lstm[l];
        auto& tr = cache.lstm[l];
        if (l == 0) {
            tr.inputs = sb.inputs;
        } else {
            const auto& below = cache.lstm[l - 1].hidden;
            if (masks)
                tr.inputs = below.cwiseProduct(masks->lstm[l - 1]);
            else
                tr.inputs = below;
        }

        tr.gates.noalias() = layer.input_weights * tr.inputs;
        tr.gates.colwise() += layer.bias;
        tr.cells.resize(H, N);
        tr.hidden.resize(H, N);

        for (Eigen::Index t = 0; t < T; ++t) {
            auto z = tr.gates.middleCols(t * B, B);
            if (t > 0)
                z.noalias() += layer.recurrent_weights * tr.hidden.middleCols((t - 1) * B, B);
            z.topRows(2 * H) = sigmoid(z.topRows(2 * H).array()).matrix();
            z.middleRows(2 * H, H) = tanh_fast(z.middleRows(2 * H, H).array()).matrix();
            z.bottomRows(H) = sigmoid(z.bottomRows(H).array()).matrix();

            auto c = tr.cells.middleCols(t * B, B);
            if (t > 0)
                c = (z.middleRows(H, H).array() * tr.cells.middleCols((t - 1) * B, B).array() +
                     z.topRows(H).array() * z.middleRows(2 * H, H).array())
                        .matrix();
            else
                c = (z.topRows(H).array() * z.middleRows(2 * H, H).array()).matrix();
            tr.hidden.middleCols(t * B, B) = (z.bottomRows(H).array() * tanh_fast(c.array())).matrix();
        }
    }

    const auto& top = cache.lstm.back().hidden;
    Matrix a = top.rightCols(B);
    if (masks)
        a = a.cwiseProduct(masks->lstm.back().rightCols(B));
    for (std::size_t k = 0; k < params.dense.size(); ++k) {
        const auto& layer = params.dense[k];
        auto& tr = cache.dense[k];
        tr.inputs = std::move(a);
        Matrix z = layer.weights * tr.inputs;
        z.colwise() += layer.bias;
        tr.activation = sigmoid(z.array()).matrix();
        if (k + 1 < params.dense.size())
            a = masks ? Matrix(tr.activation.cwiseProduct(masks->dense[k])) : tr.activation;
    }
    cache.masks = std::move(masks);
}

double mse_loss(std::span<const double> pred, std::span<const double> target, std::optional<std::span<const double>> mask)
{
    if (pred.size() != target.size() || pred.empty())
        throw UsageError("mse_loss needs equal, non-empty lengths");
    if (mask && mask->size() != pred.size())
        throw UsageError("mse_loss mask length mismatch");
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double w = mask ? (*mask)[i] : 1.0;
        if (w == 0.0)
            continue;
        const double d = pred[i] - target[i];
        sum += d * d;
        count += 1.0;
    }
    if (count == 0.0)
        throw UsageError("mse_loss mask has no active elements");
    return sum / count;
}

Gradients backward(const ForwardCache& cache, const NetworkParams& params, const Matrix& targets, const Matrix* mask)
{
    Gradients grads = Gradients::zeros(params.dims());
    BackwardScratch scratch;
    backward(cache, params, targets, mask, grads, scratch);
    return grads;
}

void backward(const ForwardCache& cache, const NetworkParams& params, const Matrix& targets, const Matrix* mask,
              Gradients& grads, BackwardScratch& scratch)
{
    const auto dims = params.dims();
    const auto T = static_cast<Eigen::Index>(cache.steps);
    const auto B = static_cast<Eigen::Index>(cache.batch);
    const auto N = T * B;
    const auto H = static_cast<Eigen::Index>(dims.lstm_size);
    check_dims(cache.lstm.size() == params.lstm.size() && cache.dense.size() == params.dense.size(),
               "cache does not match parameters");
    const Matrix& y = cache.output();
    check_dims(targets.rows() == y.rows() && targets.cols() == y.cols(), "targets");
    if (mask)
        check_dims(mask->rows() == y.rows() && mask->cols() == y.cols(), "loss mask");

    check_dims(grads.lstm.size() == params.lstm.size() && grads.dense.size() == params.dense.size(),
               "gradient storage does not match parameters");

    Matrix dz = y - targets;
    for (Eigen::Index b = 0; b < B; ++b) {
        double count = static_cast<double>(y.rows());
        if (mask) {
            count = static_cast<double>((mask->col(b).array() != 0.0).count());
            if (count == 0.0)
                throw UsageError("loss mask has no active elements in column " + std::to_string(b));
            dz.col(b) = dz.col(b).cwiseProduct(mask->col(b));
        }
        dz.col(b) *= 2.0 / count;
    }
    dz = dz.cwiseProduct(y).cwiseProduct((1.0 - y.array()).matrix());

    Matrix dtop;
    for (std::size_t kk = params.dense.size(); kk-- > 0;) {
        const auto& tr = cache.dense[kk];
        grads.dense[kk].weights.noalias() = dz * tr.inputs.transpose();
        grads.dense[kk].bias = dz.rowwise().sum();
        Matrix da = params.dense[kk].weights.transpose() * dz;
        if (kk == 0) {
            dtop = std::move(da);
            break;
        }
        if (cache.masks)
            da = da.cwiseProduct(cache.masks->dense[kk - 1]);
        const auto& a = cache.dense[kk - 1].activation;
        dz = da.cwiseProduct(a).cwiseProduct((1.0 - a.array()).matrix());
    }

    Matrix& dY = scratch.dY;
    dY.setZero(H, N);
    dY.rightCols(B) = dtop;
    for (std::size_t l = params.lstm.size(); l-- > 0;) {
        const auto& layer = params.lstm[l];
        const auto& tr = cache.lstm[l];
        if (cache.masks)
            dY = dY.cwiseProduct(cache.masks->lstm[l]);

        Matrix& dZ = scratch.dZ;
        dZ.resize(4 * H, N);
        Matrix dh_next = Matrix::Zero(H, B);
        Matrix dc_next = Matrix::Zero(H, B);
        for (Eigen::Index t = T - 1; t >= 0; --t) {
            const auto gates = tr.gates.middleCols(t * B, B).array();
            const auto i = gates.topRows(H);
            const auto f = gates.middleRows(H, H);
            const auto g = gates.middleRows(2 * H, H);
            const auto o = gates.bottomRows(H);
            const Eigen::ArrayXXd tc = tanh_fast(tr.cells.middleCols(t * B, B).array());

            const Eigen::ArrayXXd dh = dY.middleCols(t * B, B).array() + dh_next.array();
            const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();

            auto dz_t = dZ.middleCols(t * B, B);
            dz_t.topRows(H) = (dc * g * i * (1.0 - i)).matrix();
            if (t > 0)
                dz_t.middleRows(H, H) = (dc * tr.cells.middleCols((t - 1) * B, B).array() * f * (1.0 - f)).matrix();
            else
                dz_t.middleRows(H, H).setZero();
            dz_t.middleRows(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
            dz_t.bottomRows(H) = (dh * tc * o * (1.0 - o)).matrix();

            dc_next = (dc * f).matrix();
            dh_next.noalias() = layer.recurrent_weights.transpose() * dz_t;
        }

        auto& gl = grads.lstm[l];
        gl.input_weights.noalias() = dZ * tr.inputs.transpose();
        if (T > 1)
            gl.recurrent_weights.noalias() = dZ.rightCols(N - B) * tr.hidden.leftCols(N - B).transpose();
        else
            gl.recurrent_weights.setZero(4 * H, H);
        gl.bias = dZ.rowwise().sum();
        if (l > 0)
            dY.noalias() = layer.input_weights.transpose() * dZ;
    }
}

Vector predict(std::span<const Vector> window, const NetworkParams& params)
{
    auto cache = forward(SequenceBatch::from_window(window), params);
    return cache.output().col(0);
}

PoseVector predict_next(std::span<const PoseVector> window, const NetworkParams& params)
{
    check_dims(params.dims().input == kPoseDims && params.dims().output == kPoseDims, "pose network needs 50 inputs/outputs");
    const auto cache = forward(SequenceBatch::from_window(window), params);
    const auto out = cache.output().col(0);
    if (!out.allFinite())
        throw NumericalError("network produced non-finite output");
    return PoseVector(std::span<const double>(out.data(), kPoseDims));
}

std::vector<PoseVector> generate(std::span<const PoseVector> seed_window, std::size_t horizon,
                                 const NetworkParams& params)
{
    if (horizon == 0)
        throw UsageError("horizon must be at least 1");
    if (seed_window.empty())
        throw UsageError("seed window must not be empty");
    std::vector<PoseVector> window(seed_window.begin(), seed_window.end());
    std::vector<PoseVector> out;
    out.reserve(horizon);
    for (std::size_t k = 0; k < horizon; ++k) {
        out.push_back(predict_next(window, params));
        window.erase(window.begin());
        window.push_back(out.back());
    }
    return out;
}

}  // namespace kprnn
