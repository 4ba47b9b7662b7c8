from src.train.dataset import Dataset, load_csv
from src.train.preprocess import dequantize, destandardize, requantize, standardize
from src.train.trainer import fit, train_model
