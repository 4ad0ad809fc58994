#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <thread>

#include "carapace/backends.hpp"
#include "carapace/log.hpp"

namespace carapace {

/// Worker-to-evaluator handoff cell for one node. The worker publishes a
/// complete artifact under the lock; the evaluator takes it at a safe point.
class PlanSlot {
public:
    struct Published {
        std::uint64_t generation = 0;
        std::shared_ptr<const Artifact> artifact; // null on failure
        bool failed = false;
    };

    void publish(std::uint64_t generation, std::shared_ptr<const Artifact> artifact) {
        std::lock_guard lock(m_);
        if (generation <= latest_)
            return;
        latest_ = generation;
        value_ = Published{generation, std::move(artifact), false};
        ready_.store(true, std::memory_order_release);
    }

    void publish_failure(std::uint64_t generation) {
        std::lock_guard lock(m_);
        latest_ = std::max(latest_, generation);
        value_ = Published{generation, nullptr, true};
        ready_.store(true, std::memory_order_release);
    }

    /// Cheap readiness poll; takes the lock only when something is waiting.
    std::optional<Published> take() {
        if (!ready_.load(std::memory_order_acquire))
            return std::nullopt;
        std::lock_guard lock(m_);
        ready_.store(false, std::memory_order_relaxed);
        auto out = std::move(value_);
        value_.reset();
        return out;
    }

private:
    std::mutex m_;
    std::atomic<bool> ready_{false};
    std::uint64_t latest_ = 0;
    std::optional<Published> value_;
};

/// The single background replanning thread. Requests for the same node are
/// coalesced: only the newest pending one is compiled.
class ReplanWorker {
public:
    struct Job {
        IROp node;
        CardinalitySnapshot snapshot;
        std::uint64_t generation = 0;
        PlanSlot *slot = nullptr;
    };

    explicit ReplanWorker(JitConfig cfg) : cfg_(std::move(cfg)) {
        thread_ = std::jthread([this](std::stop_token st) { loop(st); });
    }

    ~ReplanWorker() {
        thread_.request_stop();
        cv_.notify_all();
    }

    ReplanWorker(const ReplanWorker &) = delete;
    ReplanWorker &operator=(const ReplanWorker &) = delete;

    void submit(Job job) {
        {
            std::lock_guard lock(m_);
            pending_[job.node.id] = std::move(job);
        }
        cv_.notify_one();
    }

    std::size_t completed() const { return completed_.load(); }

private:
    void loop(std::stop_token st) {
        while (!st.stop_requested()) {
            Job job;
            {
                std::unique_lock lock(m_);
                cv_.wait(lock, st, [&] { return !pending_.empty(); });
                if (st.stop_requested())
                    return;
                job = std::move(pending_.begin()->second);
                pending_.erase(pending_.begin());
                if (cfg_.worker_delay.count() > 0) {
                    cv_.wait_for(lock, st, cfg_.worker_delay, [] { return false; });
                    if (st.stop_requested())
                        return;
                }
            }
            try {
                if (cfg_.fail_compile && cfg_.fail_compile(job.node.id))
                    throw std::runtime_error("injected compilation failure");
                auto orders = compute_orders(job.node, job.snapshot, cfg_.sort);
                auto art = std::make_shared<Artifact>(build_artifact(job.node, orders, cfg_));
                art->generation = job.generation;
                job.slot->publish(job.generation, std::move(art));
            } catch (const std::exception &e) {
                log().warn("replanning node {} failed: {}", job.node.id, e.what());
                job.slot->publish_failure(job.generation);
            }
            ++completed_;
        }
    }

    JitConfig cfg_;
    std::mutex m_;
    std::condition_variable_any cv_;
    std::map<NodeId, Job> pending_;
    std::atomic<std::size_t> completed_{0};
    std::jthread thread_;
};

/// The adaptive dispatcher: a NodeHook that intercepts nodes of the
/// configured granularity at their safe points.
class JitEngine : public NodeHook {
public:
    JitEngine(JitConfig cfg, const IROp &root) : cfg_(std::move(cfg)), kind_(target_kind(cfg_.granularity)) {
        check_config(cfg_);
        for_each_node(root, [&](const IROp &n) {
            if (n.kind == kind_) {
                auto &st = states_[n.id];
                st.keys = view_keys(n, cfg_.granularity);
                st.slot = std::make_unique<PlanSlot>();
            }
        });
        if (cfg_.sync == SyncMode::Async)
            worker_ = std::make_unique<ReplanWorker>(cfg_);
    }

    const JitConfig &config() const { return cfg_; }

    bool on_node(const IROp &node, ExecContext &ctx) override {
        if (node.kind != kind_)
            return false;
        auto it = states_.find(node.id);
        if (it == states_.end())
            return false;
        auto &st = it->second;
        if (st.failed)
            return false;
        return cfg_.sync == SyncMode::Blocking ? blocking(node, st, ctx) : async(node, st, ctx);
    }

private:
    struct NodeState {
        std::set<ViewKey> keys;
        std::unique_ptr<PlanSlot> slot;
        std::shared_ptr<const Artifact> artifact;
        CardinalitySnapshot basis; // snapshot the active (or latest requested) plan came from
        bool requested = false;
        std::uint64_t generation = 0;
        std::uint64_t adopted = 0;
        bool failed = false;
    };

    bool periodic() const { return !std::isinf(cfg_.freshness); }

    void record(NodeId id, ExecContext &ctx, std::uint64_t gen, bool adopted, const CardinalitySnapshot &s) {
        ctx.stats.replans.push_back({id, ctx.stats.iterations, gen, adopted, s});
        auto &ns = ctx.stats.nodes[id];
        ++ns.replans;
        if (adopted)
            ns.adopted_generations.push_back(gen);
    }

    std::shared_ptr<const Artifact> build(const IROp &node, const CardinalitySnapshot &full, std::uint64_t gen) {
        if (cfg_.fail_compile && cfg_.fail_compile(node.id))
            throw std::runtime_error("injected compilation failure");
        auto art = std::make_shared<Artifact>(build_artifact(node, compute_orders(node, full, cfg_.sort), cfg_));
        art->generation = gen;
        return art;
    }

    void give_up(NodeState &st, NodeId id, ExecContext &ctx, const char *why) {
        log().warn("node {}: {}; interpreting from now on", id, why);
        st.failed = true;
        st.artifact.reset();
        ++ctx.stats.failed_compilations;
    }

    bool blocking(const IROp &node, NodeState &st, ExecContext &ctx) {
        auto full = snapshot(ctx.store, cfg_.granularity, ctx.stats.iterations);
        auto mine = restrict(full, st.keys);
        if (!st.artifact || (periodic() && fresh(st.basis, mine, cfg_.freshness))) {
            try {
                st.artifact = build(node, full, ++st.generation);
            } catch (const std::exception &e) {
                give_up(st, node.id, ctx, e.what());
                return false;
            }
            st.basis = mine;
            st.adopted = st.generation;
            record(node.id, ctx, st.generation, true, mine);
        }
        run(node, st, ctx);
        return true;
    }

    /// Adopts a published artifact if it is newer than the active one.
    void poll(const IROp &node, NodeState &st, ExecContext &ctx) {
        auto pub = st.slot->take();
        if (!pub)
            return;
        if (pub->failed) {
            give_up(st, node.id, ctx, "background compilation failed");
            return;
        }
        if (pub->generation <= st.adopted || pub->artifact->generation != pub->generation) {
            ++ctx.stats.discarded_artifacts;
            return;
        }
        st.artifact = pub->artifact;
        st.adopted = pub->generation;
        ctx.stats.nodes[node.id].adopted_generations.push_back(pub->generation);
        for (auto &ev : ctx.stats.replans)
            if (ev.node == node.id && ev.generation == pub->generation)
                ev.adopted = true;
    }

    bool async(const IROp &node, NodeState &st, ExecContext &ctx) {
        poll(node, st, ctx);
        if (st.failed)
            return false;
        auto full = snapshot(ctx.store, cfg_.granularity, ctx.stats.iterations);
        auto mine = restrict(full, st.keys);
        if (!st.requested || (periodic() && fresh(st.basis, mine, cfg_.freshness))) {
            st.requested = true;
            st.basis = mine;
            worker_->submit({node, std::move(full), ++st.generation, st.slot.get()});
            record(node.id, ctx, st.generation, false, mine);
        }
        if (!st.artifact)
            return false;
        run(node, st, ctx);
        return true;
    }

    /// Full scope runs the artifact straight through. Snippet scope returns
    /// to the dispatcher between children: freshness is re-checked (blocking)
    /// or the slot polled (async), and a newer artifact takes over at the
    /// next child.
    void run(const IROp &node, NodeState &st, ExecContext &ctx) {
        auto art = st.artifact;
        if (cfg_.scope == Scope::Full || art->steps.size() <= 1) {
            art->run(ctx);
            return;
        }
        for (std::size_t k = 0; k < art->steps.size(); ++k) {
            if (k > 0 && art->step_kinds[k] != OpKind::SwapClear) {
                if (cfg_.sync == SyncMode::Blocking) {
                    auto full = snapshot(ctx.store, cfg_.granularity, ctx.stats.iterations);
                    auto mine = restrict(full, st.keys);
                    if (periodic() && fresh(st.basis, mine, cfg_.freshness)) {
                        try {
                            st.artifact = build(node, full, ++st.generation);
                            st.basis = mine;
                            st.adopted = st.generation;
                            ++ctx.stats.snippet_refreshes;
                        } catch (const std::exception &e) {
                            give_up(st, node.id, ctx, e.what());
                            interpret_children_of(node, ctx, k);
                            return;
                        }
                    }
                } else {
                    poll(node, st, ctx);
                    if (st.failed) {
                        interpret_children_of(node, ctx, k);
                        return;
                    }
                }
                art = st.artifact;
            }
            art->steps[k](ctx);
        }
    }

    JitConfig cfg_;
    OpKind kind_;
    std::map<NodeId, NodeState> states_;
    std::unique_ptr<ReplanWorker> worker_;
};

} // namespace carapace
