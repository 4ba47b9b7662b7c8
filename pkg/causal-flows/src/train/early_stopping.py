class EarlyStopping:
    """
    Track validation loss and signal when it stops improving.

    Attributes:
        patience: Epochs without strict improvement tolerated before stopping
        counter: Consecutive epochs without improvement
        best_loss: Lowest loss seen so far
        best_epoch: Epoch index of ``best_loss``
        early_stop: Whether the patience window is exhausted
    """

    def __init__(self, patience: int = 50):
        self.patience = patience
        self.counter = 0
        self.best_loss: float | None = None
        self.best_epoch = -1
        self.early_stop = False

    def __call__(self, loss: float, epoch: int) -> bool:
        """Record one epoch; returns True when it is a new best."""
        if self.best_loss is None or loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = epoch
            self.counter = 0
            return True
        self.counter += 1
        if self.counter >= self.patience:
            self.early_stop = True
        return False
