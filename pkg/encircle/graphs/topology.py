"""
topology.py holds the two graphs a scenario is made of:

* the undirected follower communication graph (a_ij in {0, 1})
* the bipartite leader-observation graph (rows leaders, columns followers)
"""

from collections import deque
from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class FollowerGraph:
    """Undirected communication graph among the n followers

    Parameters
    ----------
    adjacency : torch.Tensor of shape (n, n)
        symmetric 0/1 matrix with a zero diagonal
    """

    adjacency: torch.Tensor

    @property
    def n(self):
        return self.adjacency.shape[0]

    def neighbors(self, i):
        """Indices N_i of the followers adjacent to follower i."""
        return torch.nonzero(self.adjacency[i], as_tuple=True)[0].tolist()

    def degree(self):
        return self.adjacency.sum(dim=1)

    def laplacian(self):
        return torch.diag(self.degree()) - self.adjacency

    def is_symmetric(self):
        return bool(torch.equal(self.adjacency, self.adjacency.T))


@dataclass(frozen=True)
class ObservationGraph:
    """Which follower observes which leader

    Parameters
    ----------
    edges : torch.Tensor of shape (m, n)
        edges[j, i] = 1 iff leader j is observed by follower i
    """

    edges: torch.Tensor

    @property
    def m(self):
        return self.edges.shape[0]

    @property
    def n(self):
        return self.edges.shape[1]

    def observers(self, j):
        """N_j^F, the followers observing leader j."""
        return torch.nonzero(self.edges[j], as_tuple=True)[0].tolist()

    def observed_leaders(self, i):
        """N_i^T, the leaders observed by follower i."""
        return torch.nonzero(self.edges[:, i], as_tuple=True)[0].tolist()

    def observer_counts(self):
        """|N_j^F| for every leader, shape (m,)."""
        return self.edges.sum(dim=1)

    def weights(self):
        """(m, n) matrix holding 1/|N_j^F| on every edge and 0 elsewhere.

        Leaders nobody observes get a zero row.
        """
        counts = self.observer_counts().clamp(min=1)
        return self.edges / counts[:, None]


def is_connected(graph):
    """Whether a breadth-first traversal from follower 0 reaches every follower."""
    n = graph.n
    if n <= 1:
        return True
    adjacency = graph.adjacency.tolist()
    visited = {0}
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other, a_ij in enumerate(adjacency[node]):
            if a_ij and other not in visited:
                visited.add(other)
                queue.append(other)
    return len(visited) == n


def observer_count(graph, j):
    """|N_j^F|, the number of followers observing leader j."""
    return int(graph.edges[j].sum().item())
