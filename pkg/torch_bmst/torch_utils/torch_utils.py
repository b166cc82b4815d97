import numpy as np
import torch


def get_torch_device(device='cpu'):
    if 'cuda' in device and torch.cuda.is_available():
        device = 'cuda'
    elif 'mps' in device:
        device = 'mps'
    else:
        device = 'cpu'
    return torch.device(device)


# Kruskal identities are checked at 1e-9, so everything runs in double precision.
# Seeded generators are CPU generators, hence the CPU default.
DEFAULT_TENSOR_ARGS = {'device': get_torch_device('cpu'), 'dtype': torch.float64}


def to_numpy(x, dtype=np.float64, clone=False):
    if torch.is_tensor(x):
        x = x.detach().cpu().numpy().astype(dtype)
        return x
    if isinstance(x, np.ndarray):
        return x.astype(dtype, copy=clone)
    return np.array(x).astype(dtype)


def to_torch(x, device='cpu', dtype=torch.float64, clone=False):
    if torch.is_tensor(x):
        if clone:
            x = x.clone()
        return x.to(device=device, dtype=dtype)
    return torch.tensor(np.asarray(x), dtype=dtype, device=device)


def to_torch_2d_min(variable, tensor_args=None):
    if tensor_args is None:
        tensor_args = DEFAULT_TENSOR_ARGS
    tensor_var = to_torch(variable, **tensor_args)
    if tensor_var.ndim == 1:
        return tensor_var.unsqueeze(0)
    return tensor_var


def batch_reachability(adjacency):
    """
    Transitive closure of a batch of undirected adjacency matrices.
    :param adjacency: bool tensor of shape (B, k, k)
    :return: bool tensor of shape (B, k, k), True where the two vertices are connected
    """
    B, k, _ = adjacency.shape
    eye = torch.eye(k, dtype=torch.bool, device=adjacency.device).expand(B, k, k)
    reach = (adjacency | eye).to(torch.float32)
    # path lengths double at every squaring
    for _ in range(max(1, int(np.ceil(np.log2(max(k, 2)))))):
        reach = (torch.bmm(reach, reach) > 0).to(torch.float32)
    return reach > 0
