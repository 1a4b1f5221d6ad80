#pragma once

#include <array>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "mpc3/wire.hpp"

namespace mpc3 {

enum class PartyRole : int { Proxy0 = 0, Proxy1 = 1, Helper = 2 };

inline const char* role_name(PartyRole r) {
    switch (r) {
        case PartyRole::Proxy0: return "p0";
        case PartyRole::Proxy1: return "p1";
        case PartyRole::Helper: return "p2";
    }
    return "?";
}

inline int role_index(PartyRole r) { return static_cast<int>(r); }

// --- Metering ---------------------------------------------------------------
//
// Round-counting convention: one round per dependency barrier. Frames that
// can travel concurrently between distinct party pairs inside one barrier
// count as a single round, and helper-dealt correlated material counts as
// one delivery barrier per protocol invocation. Nested protocol calls
// accumulate into every enclosing scope.

struct OpStats {
    u64 calls = 0;
    u64 rounds = 0;
    u64 bytes_sent = 0;
};

class Meter {
  public:
    class Scope {
      public:
        Scope(Meter* m, const std::string& label) : m_(m) {
            if (m_) m_->enter(label);
        }
        ~Scope() {
            if (m_) m_->leave();
        }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

      private:
        Meter* m_;
    };

    Scope scope(const std::string& label) { return Scope(this, label); }

    void round() {
        total_rounds_++;
        for (const auto& label : stack_) stats_[label].rounds++;
    }

    void add_bytes(u64 n) {
        total_bytes_ += n;
        for (const auto& label : stack_) stats_[label].bytes_sent += n;
    }

    u64 total_rounds() const { return total_rounds_; }
    u64 total_bytes() const { return total_bytes_; }
    const std::map<std::string, OpStats>& stats() const { return stats_; }

    const std::string& current_label() const {
        static const std::string none = "-";
        return stack_.empty() ? none : stack_.back();
    }

    void reset() {
        stats_.clear();
        stack_.clear();
        total_rounds_ = 0;
        total_bytes_ = 0;
    }

  private:
    void enter(const std::string& label) {
        stats_[label].calls++;
        stack_.push_back(label);
    }
    void leave() { stack_.pop_back(); }

    std::vector<std::string> stack_;
    std::map<std::string, OpStats> stats_;
    u64 total_rounds_ = 0;
    u64 total_bytes_ = 0;
};

// --- Transcript capture (tests and masking checks) --------------------------

struct TranscriptRecord {
    PartyRole from;
    PartyRole to;
    std::string label;
    Bytes payload;
};

struct Transcript {
    std::mutex mu;
    std::vector<TranscriptRecord> records;

    void add(PartyRole from, PartyRole to, const std::string& label, const Bytes& payload) {
        std::lock_guard<std::mutex> lock(mu);
        records.push_back({from, to, label, payload});
    }
};

// --- Channels ----------------------------------------------------------------

// One directed endpoint pair between two parties. send() frames the payload;
// recv() blocks until the peer's next frame arrives, in send order.
class Channel {
  public:
    virtual ~Channel() = default;
    virtual void send_bytes(const Bytes& payload) = 0;
    virtual Bytes recv_bytes() = 0;
    // Unblocks the peer's pending and future receives with an error, so a
    // party that throws mid-protocol does not strand the others.
    virtual void shutdown() {}
};

class InProcQueue {
  public:
    void push(Bytes b) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            q_.push_back(std::move(b));
        }
        cv_.notify_one();
    }

    Bytes pop() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return !q_.empty() || poisoned_; });
        if (q_.empty()) throw TransportError("peer closed the channel");
        Bytes b = std::move(q_.front());
        q_.pop_front();
        return b;
    }

    void poison() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            poisoned_ = true;
        }
        cv_.notify_all();
    }

  private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Bytes> q_;
    bool poisoned_ = false;
};

// Paired in-process queues carrying the same framed format as the socket
// transport so the frame path is exercised in tests.
class InProcChannel : public Channel {
  public:
    InProcChannel(u64 session, std::shared_ptr<InProcQueue> tx, std::shared_ptr<InProcQueue> rx)
        : session_(session), tx_(std::move(tx)), rx_(std::move(rx))  {}

    void send_bytes(const Bytes& payload) override {
        Bytes frame = frame_header(session_, send_seq_++, static_cast<u32>(payload.size()));
        frame.insert(frame.end(), payload.begin(), payload.end());
        tx_->push(std::move(frame));
    }

    Bytes recv_bytes() override {
        Bytes frame = rx_->pop();
        if (frame.size() < kFrameHeaderSize) throw TransportError("short frame");
        Bytes header(frame.begin(), frame.begin() + kFrameHeaderSize);
        FrameHeader fh = parse_frame_header(header);
        if (fh.session != session_) throw TransportError("session id mismatch");
        if (fh.sequence != recv_seq_++) throw TransportError("out-of-order frame");
        if (fh.payload_len != frame.size() - kFrameHeaderSize)
            throw TransportError("frame length mismatch");
        return Bytes(frame.begin() + kFrameHeaderSize, frame.end());
    }

    void shutdown() override { tx_->poison(); }

  private:
    u64 session_;
    std::shared_ptr<InProcQueue> tx_, rx_;
    u64 send_seq_ = 0;
    u64 recv_seq_ = 0;
};

// The three bidirectional links of one session: P0-P1, P0-P2, P1-P2.
struct ChannelSet {
    // peer(r) is this party's channel to party r; null for itself.
    std::array<std::shared_ptr<Channel>, 3> to{};

    Channel& peer(PartyRole r) {
        auto& c = to[role_index(r)];
        if (!c) throw UsageError("no channel to that peer");
        return *c;
    }
};

// Builds the in-process full mesh for one session.
inline std::array<ChannelSet, 3> make_inproc_mesh(u64 session) {
    std::array<ChannelSet, 3> sets;
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            auto qa = std::make_shared<InProcQueue>();
            auto qb = std::make_shared<InProcQueue>();
            sets[a].to[b] = std::make_shared<InProcChannel>(session, qa, qb);
            sets[b].to[a] = std::make_shared<InProcChannel>(session, qb, qa);
        }
    }
    return sets;
}

} // namespace mpc3
