"""Hinged triplet loss and online triplet mining."""

from dataclasses import dataclass
from typing import Literal

import torch
import torch.nn.functional as F

from eegvis.core.errors import MiningError

MiningStrategy = Literal["semi_hard", "hard", "all_valid"]


@dataclass(frozen=True)
class TripletBatch:
    """(anchor, positive, negative) index rows into a minibatch (M x 3)."""

    indices: torch.Tensor

    @classmethod
    def empty(cls) -> "TripletBatch":
        return cls(torch.empty(0, 3, dtype=torch.long))

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def as_tuples(self) -> list[tuple[int, int, int]]:
        return [tuple(row) for row in self.indices.tolist()]


def pairwise_sq_distances(emb: torch.Tensor) -> torch.Tensor:
    """N x N squared Euclidean distances, computed from explicit differences."""
    diff = emb.unsqueeze(1) - emb.unsqueeze(0)
    return diff.pow(2).sum(-1)


def triplet_loss(emb: torch.Tensor, triplets: TripletBatch, margin: float) -> torch.Tensor:
    """Mean of max(0, |e_a - e_p|^2 - |e_a - e_n|^2 + margin) over triplets.

    An empty triplet batch gives a zero loss that still carries a (zero)
    gradient to ``emb``.
    """
    if len(triplets) == 0:
        return (emb * 0.0).sum()
    idx = triplets.indices.to(emb.device)
    anchor, positive, negative = emb[idx[:, 0]], emb[idx[:, 1]], emb[idx[:, 2]]
    d_ap = (anchor - positive).pow(2).sum(1)
    d_an = (anchor - negative).pow(2).sum(1)
    return F.relu(d_ap - d_an + margin).mean()


def _positive_pairs(labels: torch.Tensor) -> torch.Tensor:
    same = labels.unsqueeze(0) == labels.unsqueeze(1)
    same.fill_diagonal_(False)
    return same.nonzero()


def _negative_mask(labels: torch.Tensor) -> torch.Tensor:
    negatives = labels.unsqueeze(0) != labels.unsqueeze(1)
    if not negatives.any():
        raise MiningError("Batch holds a single class; no valid negatives")
    return negatives


def _masked_argmin(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    # argmin returns the first minimal index, so ties go to the lowest index
    return torch.where(mask, values, torch.full_like(values, float("inf"))).argmin(dim=1)


@torch.no_grad()
def mine_semi_hard(emb: torch.Tensor, labels: torch.Tensor, margin: float) -> TripletBatch:
    """Pick one negative per (anchor, positive) pair.

    Preference order: the closest negative with d_ap < d_an < d_ap + margin;
    else the closest negative with d_an > d_ap; else the closest negative.

    Raises:
        MiningError: If the batch has a single class
    """
    dist = pairwise_sq_distances(emb.detach())
    labels = labels.to(dist.device)
    negatives = _negative_mask(labels)
    pairs = _positive_pairs(labels)
    if pairs.shape[0] == 0:
        return TripletBatch.empty()

    anchors, positives = pairs[:, 0], pairs[:, 1]
    d_an = dist[anchors]
    d_ap = dist[anchors, positives].unsqueeze(1)
    neg = negatives[anchors]

    beyond = neg & (d_an > d_ap)
    semi_hard = beyond & (d_an < d_ap + margin)

    chosen = _masked_argmin(d_an, neg)
    chosen = torch.where(beyond.any(1), _masked_argmin(d_an, beyond), chosen)
    chosen = torch.where(semi_hard.any(1), _masked_argmin(d_an, semi_hard), chosen)
    return TripletBatch(torch.stack([anchors, positives, chosen], dim=1).cpu())


@torch.no_grad()
def mine_hard(emb: torch.Tensor, labels: torch.Tensor) -> TripletBatch:
    """Closest negative for every (anchor, positive) pair."""
    dist = pairwise_sq_distances(emb.detach())
    labels = labels.to(dist.device)
    negatives = _negative_mask(labels)
    pairs = _positive_pairs(labels)
    if pairs.shape[0] == 0:
        return TripletBatch.empty()
    chosen = _masked_argmin(dist[pairs[:, 0]], negatives[pairs[:, 0]])
    return TripletBatch(torch.cat([pairs, chosen.unsqueeze(1)], dim=1).cpu())


@torch.no_grad()
def mine_all_valid(labels: torch.Tensor) -> TripletBatch:
    """Every (a, p, n) with label[a] == label[p] != label[n] and a != p."""
    negatives = _negative_mask(labels)
    pairs = _positive_pairs(labels)
    rows = [
        torch.stack([a.expand(len(ns)), p.expand(len(ns)), ns], dim=1)
        for a, p in pairs
        for ns in [negatives[a].nonzero().squeeze(1)]
    ]
    if not rows:
        return TripletBatch.empty()
    return TripletBatch(torch.cat(rows).cpu())


def mine_triplets(
    emb: torch.Tensor, labels: torch.Tensor, margin: float, strategy: MiningStrategy = "semi_hard"
) -> TripletBatch:
    """Dispatch to one of the mining strategies."""
    if strategy == "semi_hard":
        return mine_semi_hard(emb, labels, margin)
    if strategy == "hard":
        return mine_hard(emb, labels)
    if strategy == "all_valid":
        return mine_all_valid(labels)
    raise ValueError(f"Unknown mining strategy: {strategy}")
