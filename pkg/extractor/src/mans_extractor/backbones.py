"""Image encoders behind a single tiny interface.

A backbone turns a batch of image paths into one feature vector per path
(or None for an unreadable input). The production path is a pretrained
VGG-16 penultimate layer; the vector-file backbone reads precomputed
values from text or .npy files, which keeps fixtures and debugging free
of any deep-learning dependency.
"""

import numpy as np

VGG16_DIM = 4096


class VectorFileBackbone:
    """Each "image" is a file holding its feature vector directly: either
    ``.npy`` or whitespace/comma-separated text."""

    def __init__(self, d_v):
        self.d_v = d_v

    def encode_batch(self, paths):
        out = []
        for path in paths:
            try:
                if str(path).endswith(".npy"):
                    vec = np.load(path)
                else:
                    with open(path, encoding="utf-8") as fh:
                        vec = np.array([float(v) for v in fh.read().replace(",", " ").split()])
                vec = np.asarray(vec, dtype=np.float32).reshape(-1)
                if vec.shape != (self.d_v,):
                    raise ValueError(f"expected {self.d_v} values, got {vec.shape}")
            except (OSError, ValueError) as exc:
                out.append(None)
                self.last_error = f"{path}: {exc}"
                continue
            out.append(vec)
        return out


class Vgg16Backbone:
    """Pretrained VGG-16, 4096-d activations of the penultimate linear
    layer, standard ImageNet preprocessing."""

    def __init__(self, d_v=VGG16_DIM, device="cpu"):
        if d_v != VGG16_DIM:
            raise ValueError(f"vgg16 produces {VGG16_DIM}-d features, not {d_v}")
        import torch
        from torchvision import models, transforms
        from PIL import Image

        self._torch = torch
        self._image = Image
        self.device = device
        weights = models.VGG16_Weights.IMAGENET1K_V1
        net = models.vgg16(weights=weights)
        # keep everything up to and including the second 4096-d linear+ReLU
        net.classifier = net.classifier[:5]
        net.eval()
        self.net = net.to(device)
        self.preprocess = transforms.Compose([
            transforms.Resize(256),
            transforms.CenterCrop(224),
            transforms.ToTensor(),
            transforms.Normalize(mean=[0.485, 0.456, 0.406],
                                 std=[0.229, 0.224, 0.225]),
        ])

    def encode_batch(self, paths):
        tensors, readable = [], []
        out = [None] * len(paths)
        for idx, path in enumerate(paths):
            try:
                with self._image.open(path) as img:
                    tensors.append(self.preprocess(img.convert("RGB")))
                readable.append(idx)
            except (OSError, ValueError) as exc:
                self.last_error = f"{path}: {exc}"
        if tensors:
            with self._torch.no_grad():
                batch = self._torch.stack(tensors).to(self.device)
                feats = self.net(batch).cpu().numpy().astype(np.float32)
            for row, idx in enumerate(readable):
                out[idx] = feats[row]
        return out


BACKBONES = {
    "vgg16": Vgg16Backbone,
    "vector": VectorFileBackbone,
}


def get_backbone(name, d_v, device="cpu"):
    if name not in BACKBONES:
        raise ValueError(f"unknown backbone {name!r}, expected one of {sorted(BACKBONES)}")
    if name == "vgg16":
        return Vgg16Backbone(d_v=d_v, device=device)
    return VectorFileBackbone(d_v=d_v)
