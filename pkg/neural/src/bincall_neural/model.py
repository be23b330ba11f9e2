"""Call-site encoder, the three procedure encoders, and the attention decoder.

The callsite encoding is [sum of API-subtoken embeddings ; six value
embeddings], short argument lists padded with the no-arg symbol. Sequence
encoders produce one latent vector per call-site sequence; the graph
encoder produces one latent per graph node. A Luong-style attention decoder
generates name subtokens over the latent set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
from torch import nn

from .vocab import BOS, EOS, NO_ARG, UNK, Vocab

K_ARGS = 6
ARCHS = ("lstm", "transformer", "gnn")


# --- featurization -----------------------------------------------------------


@dataclass
class PackedCallsites:
    name_ids: torch.Tensor  # (n, m) long, padded
    name_mask: torch.Tensor  # (n, m) float
    value_ids: torch.Tensor  # (n, K_ARGS) long

    def __len__(self):
        return self.name_ids.shape[0]


@dataclass
class Features:
    proc_id: str
    graph: PackedCallsites
    adj_norm: torch.Tensor  # (n, n)
    sequences: list  # of PackedCallsites
    target_ids: torch.Tensor  # name subtokens + EOS


def pack_callsites(callsites, vocab: Vocab, use_values: bool = True) -> PackedCallsites:
    n = len(callsites)
    no_arg = vocab.value_ids[NO_ARG]
    if n == 0:
        return PackedCallsites(
            torch.zeros((0, 1), dtype=torch.long),
            torch.zeros((0, 1)),
            torch.full((0, K_ARGS), no_arg, dtype=torch.long),
        )
    m = max(1, max(len(cs.tokens) for cs in callsites))
    name_ids = torch.zeros((n, m), dtype=torch.long)
    mask = torch.zeros((n, m))
    value_ids = torch.full((n, K_ARGS), no_arg, dtype=torch.long)
    for i, cs in enumerate(callsites):
        for j, token in enumerate(cs.tokens):
            name_ids[i, j] = vocab.name_id(token)
            mask[i, j] = 1.0
        if use_values:
            for j, value in enumerate(cs.values[:K_ARGS]):
                value_ids[i, j] = vocab.value_id(value)
    return PackedCallsites(name_ids, mask, value_ids)


def adj_normalized(n: int, edges) -> torch.Tensor:
    """Symmetric adjacency scaled by 1/c_{u,v} with c = sqrt(deg_u * deg_v)."""
    adj = torch.zeros((n, n))
    for src, dst in edges:
        adj[src, dst] = 1.0
        adj[dst, src] = 1.0
    deg = adj.sum(dim=1).clamp(min=1.0)
    c = torch.sqrt(deg.unsqueeze(1) * deg.unsqueeze(0))
    return adj / c


def featurize(record, vocab: Vocab, use_values: bool = True) -> Features:
    target = [vocab.out_id(t) for t in record.name_tokens] + [vocab.out_ids[EOS]]
    return Features(
        proc_id=record.proc_id,
        graph=pack_callsites(record.nodes, vocab, use_values),
        adj_norm=adj_normalized(len(record.nodes), record.edges),
        sequences=[pack_callsites(seq, vocab, use_values) for seq in record.sequences],
        target_ids=torch.tensor(target, dtype=torch.long),
    )


# --- callsite encoder --------------------------------------------------------


class CallsiteEncoder(nn.Module):
    def __init__(self, n_names: int, n_values: int, d: int = 128):
        super().__init__()
        self.d = d
        self.name_emb = nn.Embedding(n_names, d)
        self.value_emb = nn.Embedding(n_values, d)

    @property
    def width(self) -> int:
        return (1 + K_ARGS) * self.d

    def forward(self, packed: PackedCallsites) -> torch.Tensor:
        if len(packed) == 0:
            return torch.zeros((0, self.width))
        names = (self.name_emb(packed.name_ids) * packed.name_mask.unsqueeze(-1)).sum(1)
        values = self.value_emb(packed.value_ids).reshape(len(packed), K_ARGS * self.d)
        return torch.cat([names, values], dim=1)


# --- procedure encoders ------------------------------------------------------


class LstmEncoder(nn.Module):
    def __init__(self, d_in: int, hidden: int = 128):
        super().__init__()
        self.lstm = nn.LSTM(d_in, hidden, bidirectional=True, batch_first=True)
        self.null = nn.Parameter(torch.zeros(2 * hidden))
        self.out_width = 2 * hidden

    def forward(self, sequences) -> torch.Tensor:
        zs = []
        for seq in sequences:
            if seq.shape[0] == 0:
                zs.append(self.null)
                continue
            _, (h, _) = self.lstm(seq.unsqueeze(0))
            zs.append(torch.cat([h[0, 0], h[1, 0]]))  # [h_l-> ; h_l<-]
        return torch.stack(zs)


def attention_pool(states: torch.Tensor, query: torch.Tensor):
    alpha = torch.softmax(states @ query, dim=0)
    return alpha @ states, alpha


class TransformerSeqEncoder(nn.Module):
    def __init__(
        self,
        d_in: int,
        d_model: int = 128,
        n_layers: int = 6,
        n_heads: int = 4,
        ff: int = 128,
        dropout: float = 0.5,
    ):
        super().__init__()
        self.proj = nn.Linear(d_in, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model, n_heads, dim_feedforward=ff, dropout=dropout, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, n_layers)
        self.query = nn.Parameter(torch.randn(d_model) / math.sqrt(d_model))
        self.null = nn.Parameter(torch.zeros(d_model))
        self.out_width = d_model

    def forward(self, sequences) -> torch.Tensor:
        zs = []
        for seq in sequences:
            if seq.shape[0] == 0:
                zs.append(self.null)
                continue
            states = self.encoder(self.proj(seq).unsqueeze(0))[0]
            pooled, _ = attention_pool(states, self.query)
            zs.append(pooled)
        return torch.stack(zs)


def gcn_layer(h, adj_norm, w_self, w_neighbor):
    """h_v' = relu( sum_u adj_norm[v,u] * (h_u W_n) + h_v W_s )"""
    return torch.relu(adj_norm @ (h @ w_neighbor) + h @ w_self)


class GcnEncoder(nn.Module):
    def __init__(self, d_in: int, d: int = 128, k: int = 4):
        super().__init__()
        dims = [d_in] + [d] * k
        self.w_self = nn.ParameterList()
        self.w_neighbor = nn.ParameterList()
        for a, b in zip(dims, dims[1:]):
            for bucket in (self.w_self, self.w_neighbor):
                w = torch.empty(a, b)
                nn.init.xavier_uniform_(w)
                bucket.append(nn.Parameter(w))
        self.out_width = d

    def forward(self, x, adj_norm) -> torch.Tensor:
        h = x
        for w_self, w_neighbor in zip(self.w_self, self.w_neighbor):
            h = gcn_layer(h, adj_norm, w_self, w_neighbor)
        return h


# --- attention decoder -------------------------------------------------------


def attend_step(latents, h, w_a):
    """alpha = softmax(z . W_a . h); c = sum alpha_i z_i"""
    alpha = torch.softmax(latents @ (w_a @ h), dim=0)
    return alpha @ latents, alpha


class AttentionDecoder(nn.Module):
    def __init__(self, dz: int, n_out: int, d_emb: int = 128, hidden: int = 256):
        super().__init__()
        self.emb = nn.Embedding(n_out, d_emb)
        self.cell = nn.LSTMCell(d_emb, hidden)
        w_a = torch.empty(dz, hidden)
        nn.init.xavier_uniform_(w_a)
        self.w_a = nn.Parameter(w_a)
        self.w_c = nn.Linear(dz + hidden, d_emb)
        self.init_h = nn.Linear(dz, hidden)
        self.hidden = hidden

    def init_state(self, latents):
        h0 = torch.tanh(self.init_h(latents.mean(dim=0)))
        return h0, torch.zeros(self.hidden)

    def step(self, token_id: int, state, latents):
        inp = self.emb(torch.tensor(token_id))
        h, c = self.cell(inp.unsqueeze(0), (state[0].unsqueeze(0), state[1].unsqueeze(0)))
        h, c = h[0], c[0]
        ctx, alpha = attend_step(latents, h, self.w_a)
        combined = torch.tanh(self.w_c(torch.cat([ctx, h])))
        logits = combined @ self.emb.weight.T  # E_out . sigma(W_c[c;h])
        return logits, (h, c), alpha


# --- full model --------------------------------------------------------------


class NameModel(nn.Module):
    def __init__(self, vocab: Vocab, arch: str, d: int = 128, dropout: float = 0.5):
        super().__init__()
        if arch not in ARCHS:
            raise ValueError(f"unknown arch {arch!r}")
        self.arch = arch
        self.vocab = vocab
        self.callsites = CallsiteEncoder(len(vocab.name_ids), len(vocab.value_ids), d)
        self.dropout = nn.Dropout(dropout)
        width = self.callsites.width
        if arch == "lstm":
            self.encoder = LstmEncoder(width, hidden=d)
        elif arch == "transformer":
            self.encoder = TransformerSeqEncoder(width, d_model=d, dropout=dropout)
        else:
            self.encoder = GcnEncoder(width, d=d)
        self.decoder = AttentionDecoder(self.encoder.out_width, len(vocab.out_ids), d_emb=d)
        self.bos = vocab.out_ids[BOS]
        self.eos = vocab.out_ids[EOS]

    def latents(self, feats: Features):
        if self.arch == "gnn":
            if len(feats.graph) == 0:
                return None
            x = self.dropout(self.callsites(feats.graph))
            return self.encoder(x, feats.adj_norm)
        if not feats.sequences:
            return None
        vectors = [self.dropout(self.callsites(seq)) for seq in feats.sequences]
        return self.encoder(vectors)

    def loss(self, feats: Features) -> torch.Tensor:
        latents = self.latents(feats)
        if latents is None:
            return torch.zeros((), requires_grad=True)
        state = self.decoder.init_state(latents)
        total = torch.zeros(())
        prev = self.bos
        for target in feats.target_ids.tolist():
            logits, state, _ = self.decoder.step(prev, state, latents)
            total = total + nn.functional.cross_entropy(
                logits.unsqueeze(0), torch.tensor([target])
            )
            prev = target  # teacher forcing
        return total / len(feats.target_ids)

    @torch.no_grad()
    def greedy(self, feats: Features, max_len: int = 8) -> list:
        latents = self.latents(feats)
        if latents is None:
            return [UNK]
        state = self.decoder.init_state(latents)
        tokens = []
        out_tokens = self.vocab.out_tokens
        prev = self.bos
        for _ in range(max_len):
            logits, state, _ = self.decoder.step(prev, state, latents)
            prev = int(logits.argmax())
            if prev == self.eos:
                break
            tokens.append(out_tokens[prev])
        return tokens or [UNK]
