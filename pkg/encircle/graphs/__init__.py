from .topology import FollowerGraph, ObservationGraph, is_connected, observer_count
