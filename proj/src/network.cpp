#include "facet/network.hpp"

#include <cmath>

#include "facet/errors.hpp"
#include "facet/kernels.hpp"

namespace facet {

using kernels::matvec;
using kernels::matvec_add;
using kernels::matvec_t_add;
using kernels::outer_add;
using kernels::sigmoid;

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "linear";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    throw config_error("unknown activation: " + s);
}

std::size_t NetworkSpec::representation_dim() const {
    if (!gru_widths.empty()) return gru_widths.back();
    if (!encoder_widths.empty()) return encoder_widths.back();
    return input_dim;
}

void NetworkSpec::validate() const {
    if (input_dim == 0) throw config_error("input_dim must be positive");
    if (class_count == 0) throw config_error("class_count must be positive");
    if (encoder_widths.empty() && gru_widths.empty()) {
        throw config_error("network spec has no layers");
    }
    for (std::size_t w : encoder_widths) {
        if (w == 0) throw config_error("encoder width must be positive");
    }
    for (std::size_t w : gru_widths) {
        if (w == 0) throw config_error("gru width must be positive");
    }
    if (!encoder_activations.empty() &&
        encoder_activations.size() != encoder_widths.size()) {
        throw config_error("encoder_activations must match encoder_widths");
    }
}

namespace {

template <class Net, class Fn>
void visit_params(Net& net, Fn&& fn) {
    for (std::size_t l = 0; l < net.encoder.size(); ++l) {
        const std::string p = "encoder." + std::to_string(l) + ".";
        fn(p + "w", net.encoder[l].w);
        fn(p + "b", net.encoder[l].b);
    }
    for (std::size_t l = 0; l < net.gru.size(); ++l) {
        const std::string p = "gru." + std::to_string(l) + ".";
        fn(p + "wz", net.gru[l].wz);
        fn(p + "uz", net.gru[l].uz);
        fn(p + "bz", net.gru[l].bz);
        fn(p + "wr", net.gru[l].wr);
        fn(p + "ur", net.gru[l].ur);
        fn(p + "br", net.gru[l].br);
        fn(p + "wh", net.gru[l].wh);
        fn(p + "uh", net.gru[l].uh);
        fn(p + "bh", net.gru[l].bh);
    }
    fn("output.w", net.output.w);
    fn("output.b", net.output.b);
}

} // namespace

void NetworkState::for_each_param(
    const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_params(*this, fn);
}

void NetworkState::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
    visit_params(*this, fn);
}

NetworkState zeros_like(const NetworkState& net) {
    NetworkState z = net;
    z.for_each_param([](const std::string&, Tensor& t) { t.fill(0.0); });
    return z;
}

NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed,
                          double init_std, double bias_init) {
    spec.validate();
    if (!(init_std > 0.0)) throw config_error("init_std must be positive");

    NetworkState net;
    net.spec = spec;

    std::size_t in = spec.input_dim;
    for (std::size_t l = 0; l < spec.encoder_widths.size(); ++l) {
        DenseLayer d;
        const std::size_t out = spec.encoder_widths[l];
        d.w = Tensor::matrix(out, in);
        d.b = Tensor::vec(out);
        d.act = spec.encoder_activations.empty() ? Activation::relu
                                                 : spec.encoder_activations[l];
        net.encoder.push_back(std::move(d));
        in = out;
    }
    for (std::size_t w : spec.gru_widths) {
        GruLayer g;
        g.wz = Tensor::matrix(w, in);
        g.uz = Tensor::matrix(w, w);
        g.bz = Tensor::vec(w);
        g.wr = Tensor::matrix(w, in);
        g.ur = Tensor::matrix(w, w);
        g.br = Tensor::vec(w);
        g.wh = Tensor::matrix(w, in);
        g.uh = Tensor::matrix(w, w);
        g.bh = Tensor::vec(w);
        net.gru.push_back(std::move(g));
        in = w;
    }
    net.output.w = Tensor::matrix(spec.class_count, in);
    net.output.b = Tensor::vec(spec.class_count);

    Rng rng(derive_seed(seed, /*tag=*/0x696e6974));
    net.for_each_param([&](const std::string&, Tensor& t) {
        if (t.rank() == 2) {
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.truncated_normal(init_std);
        } else {
            t.fill(bias_init);
        }
    });
    return net;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

ForwardTrace run_forward(const NetworkState& net, const Tensor& frames,
                         double dropout_rate, Rng* rng) {
    if (frames.rank() != 2) throw shape_error("frames must be a T x d matrix");
    if (frames.cols() != net.input_dim()) {
        throw shape_error("frame width " + std::to_string(frames.cols()) +
                          " does not match network input " +
                          std::to_string(net.input_dim()));
    }
    const std::size_t steps = frames.rows();
    const std::size_t n_enc = net.encoder.size();
    const std::size_t n_gru = net.gru.size();
    const bool use_dropout = dropout_rate > 0.0 && rng != nullptr;

    ForwardTrace tr;
    tr.steps = steps;
    tr.frames = frames;
    tr.dense_pre.resize(steps);
    tr.dense_out.resize(steps);
    tr.encoder_out.resize(steps);
    if (use_dropout) tr.dropout_mask.resize(steps);
    tr.gru.resize(steps);

    std::vector<Tensor> h_prev(n_gru);
    for (std::size_t l = 0; l < n_gru; ++l) h_prev[l] = Tensor::vec(net.gru[l].hidden());

    for (std::size_t t = 0; t < steps; ++t) {
        // encoder
        Tensor x = Tensor::vec(net.input_dim());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = frames.at(t, i);
        tr.dense_pre[t].reserve(n_enc);
        tr.dense_out[t].reserve(n_enc);
        for (std::size_t l = 0; l < n_enc; ++l) {
            const DenseLayer& d = net.encoder[l];
            Tensor pre = Tensor::vec(d.b.size());
            matvec(d.w.data(), x.data(), pre.data(), d.w.rows(), d.w.cols());
            for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += d.b[i];
            Tensor out = pre;
            if (d.act == Activation::relu) {
                for (std::size_t i = 0; i < out.size(); ++i) {
                    if (out[i] < 0.0) out[i] = 0.0;
                }
            }
            tr.dense_pre[t].push_back(std::move(pre));
            tr.dense_out[t].push_back(out);
            x = std::move(out);
        }
        if (use_dropout) {
            Tensor mask = Tensor::vec(x.size());
            const double keep = 1.0 - dropout_rate;
            for (std::size_t i = 0; i < mask.size(); ++i) {
                mask[i] = rng->uniform() < dropout_rate ? 0.0 : 1.0 / keep;
            }
            for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask[i];
            tr.dropout_mask[t] = std::move(mask);
        }
        tr.encoder_out[t] = x;

        // gru stack
        tr.gru[t].reserve(n_gru);
        for (std::size_t l = 0; l < n_gru; ++l) {
            const GruLayer& g = net.gru[l];
            const std::size_t hdim = g.hidden();
            const Tensor& hp = h_prev[l];

            GruCache c;
            c.z = Tensor::vec(hdim);
            c.r = Tensor::vec(hdim);
            c.hc = Tensor::vec(hdim);
            c.h = Tensor::vec(hdim);

            matvec(g.wz.data(), x.data(), c.z.data(), hdim, g.wz.cols());
            matvec_add(g.uz.data(), hp.data(), c.z.data(), hdim, hdim);
            matvec(g.wr.data(), x.data(), c.r.data(), hdim, g.wr.cols());
            matvec_add(g.ur.data(), hp.data(), c.r.data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) {
                c.z[i] = sigmoid(c.z[i] + g.bz[i]);
                c.r[i] = sigmoid(c.r[i] + g.br[i]);
            }
            Tensor rh = Tensor::vec(hdim);
            for (std::size_t i = 0; i < hdim; ++i) rh[i] = c.r[i] * hp[i];
            matvec(g.wh.data(), x.data(), c.hc.data(), hdim, g.wh.cols());
            matvec_add(g.uh.data(), rh.data(), c.hc.data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) {
                c.hc[i] = std::tanh(c.hc[i] + g.bh[i]);
                c.h[i] = (1.0 - c.z[i]) * hp[i] + c.z[i] * c.hc[i];
            }
            h_prev[l] = c.h;
            x = c.h;
            tr.gru[t].push_back(std::move(c));
        }
    }

    tr.representation = n_gru > 0 ? tr.gru[steps - 1].back().h : tr.encoder_out[steps - 1];

    const OutputLayer& o = net.output;
    if (o.w.cols() != tr.representation.size()) {
        throw shape_error("output layer width does not match representation");
    }
    tr.output = Tensor::vec(o.b.size());
    matvec(o.w.data(), tr.representation.data(), tr.output.data(), o.w.rows(), o.w.cols());
    for (std::size_t i = 0; i < tr.output.size(); ++i) tr.output[i] += o.b[i];

    tr.representation.require_finite("forward representation");
    tr.output.require_finite("forward output");
    return tr;
}

} // namespace

ForwardTrace forward(const NetworkState& net, const Tensor& frames) {
    return run_forward(net, frames, 0.0, nullptr);
}

ForwardTrace forward_dropout(const NetworkState& net, const Tensor& frames,
                             double dropout_rate, Rng& rng) {
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw config_error("dropout_rate must be in [0, 1)");
    }
    return run_forward(net, frames, dropout_rate, &rng);
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

NetworkState backward(const NetworkState& net, const ForwardTrace& trace,
                      const Tensor& grad_output, const Tensor& grad_representation) {
    const std::size_t steps = trace.steps;
    const std::size_t n_enc = net.encoder.size();
    const std::size_t n_gru = net.gru.size();
    if (steps == 0 || trace.gru.size() != steps || trace.dense_pre.size() != steps) {
        throw shape_error("trace does not match network (empty or wrong length)");
    }
    if (n_gru > 0 && trace.gru[0].size() != n_gru) {
        throw shape_error("trace gru layer count does not match network");
    }
    if (n_enc > 0 && trace.dense_pre[0].size() != n_enc) {
        throw shape_error("trace encoder layer count does not match network");
    }
    if (grad_output.size() != net.class_count()) {
        throw shape_error("grad_output size must equal class count");
    }
    if (grad_representation.size() != net.representation_dim()) {
        throw shape_error("grad_representation size must equal representation dim");
    }

    NetworkState g = zeros_like(net);

    // Output layer; the representation receives the chained output gradient
    // plus the directly injected one.
    Tensor d_repr = grad_representation;
    outer_add(g.output.w.data(), grad_output.data(), trace.representation.data(),
              grad_output.size(), trace.representation.size());
    for (std::size_t i = 0; i < grad_output.size(); ++i) g.output.b[i] += grad_output[i];
    matvec_t_add(net.output.w.data(), grad_output.data(), d_repr.data(),
                 net.output.w.rows(), net.output.w.cols());

    // Gradient flowing into h_t of each gru layer from the future.
    std::vector<Tensor> dh_future(n_gru);
    for (std::size_t l = 0; l < n_gru; ++l) dh_future[l] = Tensor::vec(net.gru[l].hidden());
    if (n_gru > 0) dh_future[n_gru - 1] = d_repr;

    for (std::size_t ti = steps; ti-- > 0;) {
        std::vector<Tensor> dcur = dh_future;
        Tensor d_enc = Tensor::vec(trace.encoder_out[ti].size());
        if (n_gru == 0 && ti == steps - 1) d_enc = d_repr;

        for (std::size_t li = n_gru; li-- > 0;) {
            const GruLayer& gl = net.gru[li];
            GruLayer& gg = g.gru[li];
            const GruCache& c = trace.gru[ti][li];
            const std::size_t hdim = gl.hidden();
            const Tensor& in = li == 0 ? trace.encoder_out[ti] : trace.gru[ti][li - 1].h;
            const Tensor* hp = nullptr;
            Tensor hzero;
            if (ti == 0) {
                hzero = Tensor::vec(hdim);
                hp = &hzero;
            } else {
                hp = &trace.gru[ti - 1][li].h;
            }

            const Tensor& dh = dcur[li];
            Tensor daz(Tensor::vec(hdim)), dar(Tensor::vec(hdim)), dah(Tensor::vec(hdim));
            Tensor dh_prev = Tensor::vec(hdim);
            Tensor rh = Tensor::vec(hdim);
            for (std::size_t i = 0; i < hdim; ++i) {
                const double z = c.z[i], r = c.r[i], hc = c.hc[i];
                const double dhc = dh[i] * z;
                dah[i] = dhc * (1.0 - hc * hc);
                daz[i] = dh[i] * (hc - (*hp)[i]) * z * (1.0 - z);
                dh_prev[i] = dh[i] * (1.0 - z);
                rh[i] = r * (*hp)[i];
            }
            outer_add(gg.wh.data(), dah.data(), in.data(), hdim, in.size());
            outer_add(gg.uh.data(), dah.data(), rh.data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) gg.bh[i] += dah[i];

            Tensor drh = Tensor::vec(hdim);
            matvec_t_add(gl.uh.data(), dah.data(), drh.data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) {
                const double r = c.r[i];
                dar[i] = drh[i] * (*hp)[i] * r * (1.0 - r);
                dh_prev[i] += drh[i] * r;
            }
            outer_add(gg.wr.data(), dar.data(), in.data(), hdim, in.size());
            outer_add(gg.ur.data(), dar.data(), hp->data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) gg.br[i] += dar[i];
            matvec_t_add(gl.ur.data(), dar.data(), dh_prev.data(), hdim, hdim);

            outer_add(gg.wz.data(), daz.data(), in.data(), hdim, in.size());
            outer_add(gg.uz.data(), daz.data(), hp->data(), hdim, hdim);
            for (std::size_t i = 0; i < hdim; ++i) gg.bz[i] += daz[i];
            matvec_t_add(gl.uz.data(), daz.data(), dh_prev.data(), hdim, hdim);

            Tensor dx = Tensor::vec(in.size());
            matvec_t_add(gl.wz.data(), daz.data(), dx.data(), hdim, in.size());
            matvec_t_add(gl.wr.data(), dar.data(), dx.data(), hdim, in.size());
            matvec_t_add(gl.wh.data(), dah.data(), dx.data(), hdim, in.size());

            dh_future[li] = std::move(dh_prev);
            if (li > 0) {
                Tensor& lower = dcur[li - 1];
                for (std::size_t i = 0; i < lower.size(); ++i) lower[i] += dx[i];
            } else {
                for (std::size_t i = 0; i < d_enc.size(); ++i) d_enc[i] += dx[i];
            }
        }

        // encoder at this timestep
        Tensor dy = std::move(d_enc);
        if (!trace.dropout_mask.empty()) {
            const Tensor& mask = trace.dropout_mask[ti];
            for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= mask[i];
        }
        for (std::size_t li = n_enc; li-- > 0;) {
            const DenseLayer& dl = net.encoder[li];
            DenseLayer& dg = g.encoder[li];
            const Tensor& pre = trace.dense_pre[ti][li];
            Tensor dpre = Tensor::vec(pre.size());
            for (std::size_t i = 0; i < pre.size(); ++i) {
                const double gate = dl.act == Activation::relu ? (pre[i] > 0.0 ? 1.0 : 0.0) : 1.0;
                dpre[i] = dy[i] * gate;
            }
            const double* in_ptr;
            std::size_t in_size;
            if (li == 0) {
                in_ptr = trace.frames.row(ti);
                in_size = trace.frames.cols();
            } else {
                in_ptr = trace.dense_out[ti][li - 1].data();
                in_size = trace.dense_out[ti][li - 1].size();
            }
            outer_add(dg.w.data(), dpre.data(), in_ptr, dpre.size(), in_size);
            for (std::size_t i = 0; i < dpre.size(); ++i) dg.b[i] += dpre[i];
            Tensor next = Tensor::vec(in_size);
            matvec_t_add(dl.w.data(), dpre.data(), next.data(), dl.w.rows(), dl.w.cols());
            dy = std::move(next);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Finite-difference checker
// ---------------------------------------------------------------------------

double grad_check(const NetworkState& net, const Tensor& frames, const LossFn& loss,
                  double fd_step) {
    ForwardTrace tr = forward(net, frames);
    LossEval le = loss(tr.output, tr.representation);
    NetworkState analytic = backward(net, tr, le.grad_output, le.grad_representation);

    std::vector<const Tensor*> agrads;
    analytic.for_each_param(
        [&](const std::string&, Tensor& t) { agrads.push_back(&t); });

    NetworkState work = net;
    std::vector<Tensor*> params;
    work.for_each_param([&](const std::string&, Tensor& t) { params.push_back(&t); });

    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        const Tensor& a = *agrads[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double orig = t[i];
            t[i] = orig + fd_step;
            ForwardTrace tp = forward(work, frames);
            const double fplus = loss(tp.output, tp.representation).value;
            t[i] = orig - fd_step;
            ForwardTrace tm = forward(work, frames);
            const double fminus = loss(tm.output, tm.representation).value;
            t[i] = orig;
            const double numeric = (fplus - fminus) / (2.0 * fd_step);
            const double denom = std::max({std::abs(a[i]), std::abs(numeric), 1e-8});
            const double rel = std::abs(a[i] - numeric) / denom;
            if (rel > worst) worst = rel;
        }
    }
    return worst;
}

} // namespace facet
